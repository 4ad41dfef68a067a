use fakepoi_core::Error;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Validation = 1,
    InputData = 2,
    Divergence = 3,
}

/// Failure reported to the user as a JSON object on stderr.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub error: &'static str,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<u64>,
}

impl CliError {
    pub fn new(kind: ExitKind, error: &'static str, message: impl Into<String>) -> CliError {
        CliError { error, exit_code: kind as i32, message: message.into(), row: None }
    }

    pub fn usage(message: impl Into<String>) -> CliError {
        CliError::new(ExitKind::Validation, "usage", message)
    }

    /// A failure while reading the run configuration is always a
    /// validation failure, whatever its cause.
    pub fn config(e: Error) -> CliError {
        let mut err = CliError::from(e);
        err.exit_code = ExitKind::Validation as i32;
        err
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        use ExitKind::*;
        let (kind, name) = match &e {
            Error::Diverged { .. } => (Divergence, "diverged"),
            Error::MissingFile(_) => (InputData, "missing_file"),
            Error::MissingColumn(_) => (InputData, "missing_column"),
            Error::MalformedRow { .. } => (InputData, "malformed_row"),
            Error::EmptyDataset => (InputData, "empty_dataset"),
            Error::ClassTooSmall { .. } => (InputData, "class_too_small"),
            Error::TooFewRecords { .. } => (InputData, "too_few_records"),
            Error::LabelContamination { .. } => (InputData, "label_contamination"),
            Error::MissingClass(_) => (InputData, "missing_class"),
            Error::DimensionMismatch { .. } => (InputData, "dimension_mismatch"),
            Error::LengthMismatch(..) => (InputData, "length_mismatch"),
            Error::VersionMismatch { .. } => (InputData, "version_mismatch"),
            Error::Io(_) => (InputData, "io"),
            Error::Json(_) => (InputData, "json"),
            Error::Csv(_) => (InputData, "csv"),
            Error::InvalidRatios(_) => (Validation, "invalid_ratios"),
            Error::InvalidProfile(_) => (Validation, "invalid_profile"),
            Error::UnknownAttribute(_) => (Validation, "unknown_attribute"),
            Error::EmptyFeatureSet => (Validation, "empty_feature_set"),
            Error::AttributeNotActive(_) => (Validation, "attribute_not_active"),
            Error::Smote(_) => (InputData, "smote"),
            Error::InvalidShape(_) => (Validation, "invalid_shape"),
            Error::InvalidConfig(_) => (Validation, "invalid_config"),
        };
        let row = match &e {
            Error::MalformedRow { row, .. } => Some(*row),
            _ => None,
        };
        CliError { row, ..CliError::new(kind, name, e.to_string()) }
    }
}
