use fsl_core::asymptotics::AsymptoticsError;
use fsl_core::blowup::BlowupError;
use fsl_core::casebook::CasebookError;
use fsl_core::flow::FlowError;
use fsl_core::normalform::NormalFormError;
use fsl_core::polyfield::PolyError;

/// Process exit codes.
pub mod exit {
    pub const FAILED_CHECKS: u8 = 1;
    pub const PARSE: u8 = 2;
    pub const NOT_NORMAL_FORM: u8 = 3;
    pub const NOT_HYPERBOLIC: u8 = 4;
    pub const BAD_SECTION: u8 = 5;
    pub const NO_TRANSIT: u8 = 6;
}

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        CliError::new(exit::PARSE, message)
    }
}

impl From<NormalFormError> for CliError {
    fn from(e: NormalFormError) -> Self {
        CliError::new(exit::NOT_NORMAL_FORM, format!("not in normal form: {e}"))
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        CliError::new(exit::FAILED_CHECKS, e.to_string())
    }
}

impl From<BlowupError> for CliError {
    fn from(e: BlowupError) -> Self {
        match e {
            BlowupError::NotAFakeSaddle(_) => CliError::new(exit::NOT_HYPERBOLIC, e.to_string()),
            _ => CliError::new(exit::FAILED_CHECKS, e.to_string()),
        }
    }
}

impl From<AsymptoticsError> for CliError {
    fn from(e: AsymptoticsError) -> Self {
        let code = match e {
            AsymptoticsError::NotHyperbolicFakeSaddle(_) => exit::NOT_HYPERBOLIC,
            AsymptoticsError::SectionInvalid(_) => exit::BAD_SECTION,
            _ => exit::FAILED_CHECKS,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        let code = match e {
            FlowError::TransitDoesNotExist(_)
            | FlowError::NoReturn(_)
            | FlowError::StepUnderflow(..)
            | FlowError::MaxStepsExceeded(_) => exit::NO_TRANSIT,
            FlowError::InvalidOffsets(_) | FlowError::InvalidConfig(_) => exit::PARSE,
            FlowError::ExtrapolationUnstable { .. } | FlowError::BranchTrackingFailed(_) => exit::FAILED_CHECKS,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<CasebookError> for CliError {
    fn from(e: CasebookError) -> Self {
        match e {
            CasebookError::UnknownCase(_) | CasebookError::InvalidParameter(_) => CliError::parse(e.to_string()),
            CasebookError::Poly(e) => e.into(),
            CasebookError::NormalForm(e) => e.into(),
            CasebookError::Blowup(e) => e.into(),
            CasebookError::Asymptotics(e) => e.into(),
            CasebookError::Flow(e) => e.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(exit::FAILED_CHECKS, format!("i/o: {e}"))
    }
}
