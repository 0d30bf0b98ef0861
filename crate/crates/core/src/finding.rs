use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        }
    }
}

/// A diagnostic attached to a node (or a source, for fetch problems).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Finding {
    pub severity: Severity,
    pub code: &'static str,
    pub subject: String,
    pub message: String,
}

impl Finding {
    pub fn error(code: &'static str, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Finding {
            severity: Severity::Error,
            code,
            subject: subject.into(),
            message: message.into(),
        }
    }

    pub fn warning(code: &'static str, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Finding {
            severity: Severity::Warning,
            code,
            subject: subject.into(),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// `SEVERITY CODE subject message`
impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.severity.as_str(), self.code, self.subject, self.message)
    }
}

/// Finding codes. Errors start with `E_`, warnings with `W_`.
pub mod codes {
    pub const UNKNOWN_NODE: &str = "E_UNKNOWN_NODE";
    pub const NONPOSITIVE_DIMENSION: &str = "E_NONPOSITIVE_DIMENSION";
    pub const READING_ANGLE_RANGE: &str = "E_READING_ANGLE_RANGE";
    pub const NO_TARGETS: &str = "E_NO_TARGETS";
    pub const MISSING_BODY: &str = "E_MISSING_BODY";
    pub const ZONE_BODY_NOT_ZONE: &str = "E_ZONE_BODY_NOT_ZONE";
    pub const MISSING_SEGMENT_ID: &str = "E_MISSING_SEGMENT_ID";
    pub const SEGMENT_ID_EQUALS_RESOURCE: &str = "E_SEGMENT_ID_EQUALS_RESOURCE";
    pub const WRONG_NODE_TYPE: &str = "E_WRONG_NODE_TYPE";
    pub const PERCENT_RANGE: &str = "E_PERCENT_RANGE";
    pub const PERCENT_OVERFLOW: &str = "E_PERCENT_OVERFLOW";
    pub const NEGATIVE_ORIGIN: &str = "E_NEGATIVE_ORIGIN";
    pub const NONPOSITIVE_LENGTH: &str = "E_NONPOSITIVE_LENGTH";
    pub const SVG_UNSUPPORTED: &str = "E_SVG_UNSUPPORTED";
    pub const SVG_SYNTAX: &str = "E_SVG_SYNTAX";
    pub const DEGENERATE: &str = "E_DEGENERATE";
    pub const SELF_INTERSECTING: &str = "E_SELF_INTERSECTING";
    pub const NON_FINITE: &str = "E_NON_FINITE";
    pub const EMPTY_CHOICE: &str = "E_EMPTY_CHOICE";
    pub const CHOICE_OPTION_NOT_ZONE: &str = "E_CHOICE_OPTION_NOT_ZONE";
    pub const DUPLICATE_CANVAS: &str = "E_DUPLICATE_CANVAS";
    pub const RANGE_NOT_IN_SEQUENCE: &str = "E_RANGE_NOT_IN_SEQUENCE";
    pub const RANGE_ORDER: &str = "E_RANGE_ORDER";
    pub const LIST_KIND_MISMATCH: &str = "E_LIST_KIND_MISMATCH";
    pub const EMPTY_LAYER: &str = "E_EMPTY_LAYER";
    pub const NO_SEQUENCE: &str = "E_NO_SEQUENCE";
    pub const CONFLICT: &str = "E_CONFLICT";
    pub const NOT_SPATIAL: &str = "E_NOT_SPATIAL";
    pub const ZONE_CYCLE: &str = "E_ZONE_CYCLE";
    pub const TEXT_RANGE: &str = "E_TEXT_RANGE";
    pub const NOT_TEXT_SEGMENT: &str = "E_NOT_TEXT_SEGMENT";
    pub const INVALID_SELECTION: &str = "E_INVALID_SELECTION";
    pub const EMPTY_REGION: &str = "E_EMPTY_REGION";
    pub const UNRESOLVED_CONSTRAINT: &str = "E_UNRESOLVED_CONSTRAINT";
    pub const FRACTION_RANGE: &str = "E_FRACTION_RANGE";

    pub const EXTERNAL_REF: &str = "W_EXTERNAL_REF";
    pub const OUT_OF_BOUNDS: &str = "W_OUT_OF_BOUNDS";
    pub const MULTIPLE_LAYERS: &str = "W_MULTIPLE_LAYERS";
    pub const FETCH_FAILED: &str = "W_FETCH_FAILED";
    pub const FETCH_INCOMPLETE: &str = "W_FETCH_INCOMPLETE";
}
