use std::fs;
use std::sync::Arc;

use serde::Serialize;

use heckelab::characters::{
    build_with_lifts, canonical_character, canonical_epsilon, main_lemma_quantities, property1_check,
    ring_class_character, CharacterDescriptor, HeckeCharacter,
};
use heckelab::cyclotomic::{lemma1_mu_search, AbelianSubfield};
use heckelab::diophantine::{count_m as count_lattice, ridout_scan, solutions_csv, MCount, RidoutInstance};
use heckelab::family::{class_anchors, filter_ramification, persist, scan_report, OrbitAverager, TwistOrbit};
use heckelab::lseries::{central_value_with_sign, SmoothedValue};
use heckelab::quadfield::{class_group, make_field, reduced_forms, FieldContext, QuadForm};
use heckelab::rootnumber::{root_number, root_number_sign, RootNumberResult};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{write_report, write_text};
use crate::{CharArgs, CountMArgs, CountNArgs, Derivative, Lemma1Args, MainlemmaArgs, RidoutArgs, ScanArgs};

fn field(d: i64) -> Result<Arc<FieldContext>, CliError> {
    Ok(Arc::new(make_field(d)?))
}

fn base_character(k: &Arc<FieldContext>, a: &CharArgs) -> Result<HeckeCharacter, CliError> {
    if let Some(path) = &a.descriptor {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read descriptor {}: {e}", path.display())))?;
        let desc: CharacterDescriptor = serde_json::from_str(&text)?;
        return Ok(HeckeCharacter::from_descriptor(k.clone(), &desc)?);
    }
    Ok(match &a.lifts {
        Some(js) => build_with_lifts(k.clone(), canonical_epsilon(k)?, js)?,
        None => canonical_character(k.clone())?,
    })
}

/// The base character and `phi rho`.
fn character(a: &CharArgs) -> Result<(HeckeCharacter, HeckeCharacter), CliError> {
    let k = field(a.d)?;
    let phi = base_character(&k, a)?;
    let chi = match a.twist_c {
        Some(c) => {
            let n_gens = class_group(c * c * a.d)?.invariants().len();
            let mut e = a.twist_exp.clone();
            if e.len() > n_gens {
                return Err(CliError::Usage(format!(
                    "--twist-exp has {} entries but Pic(O_{c}) has {n_gens} generators",
                    e.len()
                )));
            }
            e.resize(n_gens, 0);
            phi.twist(&ring_class_character(&k, c, &e, None)?)?
        }
        None => phi.clone(),
    };
    Ok((phi, chi))
}

fn announce(path: &std::path::Path) {
    println!("wrote {}", path.display());
}

#[derive(Serialize)]
struct RingClassInfo {
    conductor: i64,
    discriminant: i64,
    order: i64,
    invariants: Vec<i64>,
    formula: i64,
}

#[derive(Serialize)]
struct FieldInfo {
    d: i64,
    h: i64,
    w_k: i64,
    a_const: f64,
    class_group_invariants: Vec<i64>,
    class_number_by_ideals: i64,
    reduced_forms: Vec<QuadForm>,
    ring_class: Option<RingClassInfo>,
}

pub fn field_info(cfg: &RunConfig, d: i64, ring: Option<i64>) -> Result<(), CliError> {
    let k = make_field(d)?;
    let ring_class = match ring {
        Some(c) if c < 1 => return Err(CliError::Usage(format!("--ring-conductor must be positive, got {c}"))),
        Some(c) => {
            let g = class_group(c * c * d)?;
            Some(RingClassInfo {
                conductor: c,
                discriminant: c * c * d,
                order: g.order(),
                invariants: g.invariants().to_vec(),
                formula: k.ring_class_number(c),
            })
        }
        None => None,
    };
    let info = FieldInfo {
        d,
        h: k.h,
        w_k: k.w_k,
        a_const: k.a_const,
        class_group_invariants: k.class_group().invariants().to_vec(),
        class_number_by_ideals: k.class_number_by_ideals(),
        reduced_forms: reduced_forms(d),
        ring_class,
    };
    println!("D = {d}: h = {}, wK = {}, A = {:.15}", info.h, info.w_k, info.a_const);
    println!("class group invariants {:?}", info.class_group_invariants);
    let forms: Vec<String> = info.reduced_forms.iter().map(|f| f.to_string()).collect();
    println!("reduced forms: {}", forms.join(" "));
    if let Some(r) = &info.ring_class {
        println!("Pic(O_{}): order {}, invariants {:?}", r.conductor, r.order, r.invariants);
    }
    announce(&write_report(cfg, "field_info", &info)?);
    Ok(())
}

#[derive(Serialize)]
struct CharInfo {
    descriptor: CharacterDescriptor,
    conductor_norm: i64,
    f: f64,
    level: i64,
    class_representatives: Vec<String>,
}

pub fn char_build(cfg: &RunConfig, a: &CharArgs) -> Result<(), CliError> {
    let (_, chi) = character(a)?;
    let info = CharInfo {
        descriptor: chi.descriptor(),
        conductor_norm: chi.conductor().norm(),
        f: chi.f_value(),
        level: chi.level(),
        class_representatives: chi.class_representatives().iter().map(|x| x.to_string()).collect(),
    };
    println!("conductor {} (norm {}), f = {:.12}", chi.conductor(), info.conductor_norm, info.f);
    println!("values in Q(zeta_{}) times radicals", info.level);
    announce(&write_report(cfg, "char_build", &info)?);
    let desc = serde_json::to_string_pretty(&info.descriptor)? + "\n";
    announce(&write_text(&cfg.output_dir, "character.json", &desc)?);
    Ok(())
}

#[derive(Serialize)]
struct CharCheck {
    property1: heckelab::characters::Property1Report,
    norm_law_checked: usize,
    max_norm_error: f64,
    max_conjugation_error: f64,
}

pub fn char_check(cfg: &RunConfig, a: &CharArgs, bound: f64) -> Result<(), CliError> {
    let (_, chi) = character(a)?;
    let k = chi.field();
    let mut checked = 0;
    let mut max_norm: f64 = 0.0;
    let mut max_conj: f64 = 0.0;
    for x in k.enumerate_ideals(bound) {
        if !chi.is_coprime_to_conductor(&x) {
            continue;
        }
        checked += 1;
        let v = chi.eval_complex(&x);
        let n = x.norm() as f64;
        max_norm = max_norm.max((v.norm_sqr() - n).abs() / n);
        max_conj = max_conj.max((chi.eval_complex(&x.conjugate(k.d)) - v.conj()).norm() / n.sqrt());
    }
    let report = CharCheck {
        property1: property1_check(&chi, bound),
        norm_law_checked: checked,
        max_norm_error: max_norm,
        max_conjugation_error: max_conj,
    };
    let p = &report.property1;
    println!(
        "{checked} ideals of norm <= {bound}: |chi|^2 = N to {max_norm:.1e}, conjugation to {max_conj:.1e}"
    );
    println!(
        "equivariant: {}, kappa_1 = kappa: {}, equivalence holds: {}",
        p.equivariant, p.kappa_matches, p.equivalence_holds
    );
    if let Some(w) = &p.equivariance_witness {
        println!("equivariance fails at {w}");
    }
    announce(&write_report(cfg, "char_check", &report)?);
    Ok(())
}

#[derive(Serialize)]
struct LvalueReport {
    w: i32,
    value: SmoothedValue,
}

pub fn lvalue(cfg: &RunConfig, a: &CharArgs, v: Derivative) -> Result<(), CliError> {
    let (_, chi) = character(a)?;
    let w = root_number_sign(&chi)?;
    let v = match v {
        Derivative::Auto => (1 - w) as u8 / 2,
        Derivative::Zero => 0,
        Derivative::One => 1,
    };
    let value = central_value_with_sign(&chi, v, cfg.tol, w)?;
    let name = if v == 0 { "L(1)" } else { "L'(1)" };
    println!("W = {w}, v = {v}");
    println!("{name} = {:.15}  (tail bound {:.2e}, f = {:.6})", value.value, value.tail_bound, value.f);
    announce(&write_report(cfg, "lvalue", &LvalueReport { w, value })?);
    Ok(())
}

pub fn rootnumber(cfg: &RunConfig, a: &CharArgs) -> Result<(), CliError> {
    let (_, chi) = character(a)?;
    let r: RootNumberResult = root_number(&chi, cfg.tol)?;
    println!("W (Gauss sum) = {:.12} + {:.3e} i", r.w_gauss[0], r.w_gauss[1]);
    for (t, z) in [1.3, 1.6].iter().zip(&r.w_fe) {
        println!("W (theta, t = {t}) = {:.12} + {:.3e} i", z[0], z[1]);
    }
    println!("sign {}, max discrepancy {:.2e}", r.sign, r.discrepancy);
    announce(&write_report(cfg, "rootnumber", &r)?);
    Ok(())
}

pub fn family_scan(cfg: &RunConfig, a: &ScanArgs) -> Result<(), CliError> {
    if a.c_max < 1 {
        return Err(CliError::Usage(format!("--c-max must be at least 1, got {}", a.c_max)));
    }
    if let Some(p) = a.primes.iter().find(|p| !heckelab::arith::is_prime(**p)) {
        return Err(CliError::Usage(format!("--primes contains {p}, which is not prime")));
    }
    let k = field(a.d)?;
    let phi = canonical_character(k.clone())?;
    let mut records = scan_report(&k, &phi, &a.primes, a.c_max, cfg.tol, cfg.mu)?;
    if let Some(r) = &a.ramification {
        records = filter_ramification(&records, r);
    }
    println!("{:>8} {:>14} {:>6} {:>12} {:>3} {:>2} {:>14} {:>10} {:>8} {:>8}", "c", "exponents", "n", "f", "W", "v", "Lv", "ratio", "N(f^.9)", "verdict");
    for r in &records {
        let n09 = r.n_counts.get("f^0.9").copied().unwrap_or_default();
        println!(
            "{:>8} {:>14} {:>6} {:>12.3} {:>3} {:>2} {:>14.9} {:>10.5} {:>8} {:>8}",
            r.conductor,
            format!("{:?}", r.exponents),
            r.order,
            r.f,
            r.w,
            r.v,
            r.lv,
            r.ratio,
            n09,
            format!("{:?}", r.verdict).to_lowercase()
        );
    }
    let label = format!("family scan D={} P={:?} c_max={}", a.d, a.primes, a.c_max);
    persist(&cfg.output_dir, &records, &label)?;
    println!("wrote {}", cfg.output_dir.join("family_records.json").display());
    Ok(())
}

#[derive(Serialize)]
struct CountNReport {
    conductor: i64,
    order: i64,
    f: f64,
    t: f64,
    class: Option<String>,
    count: usize,
}

pub fn count_n(cfg: &RunConfig, a: &CountNArgs) -> Result<(), CliError> {
    let (phi, chi) = character(&a.chi)?;
    let rho = chi.ring_class_part().cloned();
    let orbit = TwistOrbit {
        conductor: rho.as_ref().map_or(1, |r| r.conductor),
        exponents: rho.as_ref().map(|r| r.exponents.clone()).unwrap_or_default(),
        order: rho.as_ref().map_or(1, |r| r.order()),
        rho,
        chi: chi.clone(),
    };
    let t = match (a.t, a.f_exponent) {
        (Some(t), _) => t,
        (None, Some(e)) => chi.f_value().powf(e),
        (None, None) => return Err(CliError::Usage("give --t or --f-exponent".into())),
    };
    let anchors = class_anchors(chi.field(), &chi.conductor());
    let anchor = match a.class {
        Some(i) => Some(*anchors.get(i).ok_or_else(|| {
            CliError::Usage(format!("--class {i} out of range: the field has {} classes", anchors.len()))
        })?),
        None => None,
    };
    let averager = OrbitAverager::new(&phi, &orbit)?;
    let count = averager.count_n(t, anchor.as_ref());
    println!("N(chi, {t:.3}) = {count}");
    let report = CountNReport {
        conductor: orbit.conductor,
        order: orbit.order,
        f: chi.f_value(),
        t,
        class: anchor.map(|x| x.to_string()),
        count,
    };
    announce(&write_report(cfg, "count_n", &report)?);
    Ok(())
}

fn load_instance(path: &std::path::Path) -> Result<RidoutInstance, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read instance file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad instance file {}: {e}", path.display())))
}

#[derive(Serialize)]
struct CountMReport {
    instance: RidoutInstance,
    rows: Vec<MCount>,
}

pub fn count_m(cfg: &RunConfig, a: &CountMArgs) -> Result<(), CliError> {
    let instance = match &a.instance {
        Some(p) => load_instance(p)?,
        None => RidoutInstance::sqrt2_in_z7(2.5, 1),
    };
    instance.validate()?;
    let pairs = instance.pairs();
    let mut rows = Vec::new();
    match (a.q, a.c) {
        (Some(q), _) => {
            let t = a.t.ok_or_else(|| CliError::Usage("--q needs --t".into()))?;
            rows.push(count_lattice(q, t, &pairs)?);
        }
        (None, Some(c)) => {
            if instance.primes.len() != 1 || a.k.is_empty() {
                return Err(CliError::Usage("--k and --c need a single-prime instance and a list of k".into()));
            }
            let p = instance.primes[0] as i128;
            for &k in &a.k {
                let q = p
                    .checked_pow(k)
                    .ok_or_else(|| CliError::Usage(format!("{p}^{k} does not fit in 128 bits")))?;
                rows.push(count_lattice(q, (q as f64).powf(c), &pairs)?);
            }
        }
        (None, None) => return Err(CliError::Usage("give --q and --t, or --k and --c".into())),
    }
    for r in &rows {
        println!("M({}, {:.3}) = {}", r.q, r.t, r.count);
    }
    announce(&write_report(cfg, "count_m", &CountMReport { instance, rows })?);
    Ok(())
}

pub fn ridout(cfg: &RunConfig, a: &RidoutArgs) -> Result<(), CliError> {
    let path = a
        .instance
        .as_ref()
        .ok_or_else(|| CliError::Usage("ridout needs --instance <file>".into()))?;
    let mut instance = load_instance(path)?;
    if let Some(k) = a.kappa {
        instance.kappa = k;
    }
    if let Some(h) = a.height {
        instance.height = h;
    }
    let report = ridout_scan(&instance)?;
    println!(
        "kappa = {}, H = {}: {} solutions, implied constant {}",
        report.kappa,
        report.height,
        report.solutions.len(),
        report.implied_constant.map_or("none".to_string(), |c| format!("{c:.6}"))
    );
    for s in &report.solutions {
        println!("  ({}, {})  residual {:.3e}", s.u, s.v, s.residual);
    }
    match cfg.format {
        Format::Json => announce(&write_report(cfg, "ridout", &report)?),
        Format::Csv => announce(&write_text(&cfg.output_dir, "ridout_solutions.csv", &solutions_csv(&report))?),
    }
    Ok(())
}

pub fn lemma1(cfg: &RunConfig, a: &Lemma1Args) -> Result<(), CliError> {
    if !heckelab::arith::is_prime(a.p) {
        return Err(CliError::Usage(format!("-p {} is not prime", a.p)));
    }
    let f = if a.field == 1 {
        AbelianSubfield::rationals()
    } else {
        make_field(a.field)?;
        AbelianSubfield::quadratic(a.field)
    };
    let r = lemma1_mu_search(&f, a.p, a.n_max);
    println!(
        "p = {}, N <= {}: traces vanish once p^{} | N; nonzero at p^{} for N in {:?}",
        r.p,
        r.n_max,
        r.mu,
        r.mu.saturating_sub(1),
        &r.witnesses[..r.witnesses.len().min(12)]
    );
    announce(&write_report(cfg, "lemma1", &r)?);
    Ok(())
}

pub fn mainlemma(cfg: &RunConfig, a: &MainlemmaArgs) -> Result<(), CliError> {
    let (_, chi) = character(&a.chi)?;
    let r = main_lemma_quantities(&chi, cfg.mu, &a.primes);
    for e in &r.primes {
        println!("p = {}: m_p = {}, o_p = {}, n_p = {}, bound {}", e.p, e.m_p, e.o_p, e.n_p, e.bound_holds);
    }
    println!("q = {}, mu = {}, h = {}", r.q, r.mu, r.h);
    announce(&write_report(cfg, "mainlemma", &r)?);
    Ok(())
}
