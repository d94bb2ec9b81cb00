use thiserror::Error;

use heckelab::characters::CharacterError;
use heckelab::cyclotomic::CyclotomicError;
use heckelab::diophantine::DiophantineError;
use heckelab::family::FamilyError;
use heckelab::lseries::LSeriesError;
use heckelab::quadfield::QuadFieldError;
use heckelab::rootnumber::RootNumberError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("QuadFieldError: {0}")]
    QuadField(#[from] QuadFieldError),
    #[error("CyclotomicError: {0}")]
    Cyclotomic(#[from] CyclotomicError),
    #[error("CharacterError: {0}")]
    Character(#[from] CharacterError),
    #[error("LSeriesError: {0}")]
    LSeries(#[from] LSeriesError),
    #[error("RootNumberError: {0}")]
    RootNumber(#[from] RootNumberError),
    #[error("FamilyError: {0}")]
    Family(#[from] FamilyError),
    #[error("DiophantineError: {0}")]
    Diophantine(#[from] DiophantineError),
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
    #[error("SerializationError: {0}")]
    Serialization(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}
