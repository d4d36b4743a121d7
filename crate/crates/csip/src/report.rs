//! Verification report records and their published JSON schema.
//!
//! Margins are normalized: each trial produces a signed slack divided by the
//! check's scale, so `worst_margin >= -tol` is the pass condition regardless
//! of the magnitude of the sampled elements. Equality checks report the
//! negated relative error (0 is perfect agreement).

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Outcome record of one property checked over many seeded trials.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    /// Which property was exercised.
    pub property: String,
    /// Label of the construction the property ran against.
    pub construction: String,
    /// Number of trials executed.
    pub trials: u64,
    /// Trials that violated the property at its tolerance.
    pub failures: u64,
    /// Smallest normalized margin observed across trials.
    pub worst_margin: f64,
    /// Element literals for the first failing trial, if any.
    pub witness: Option<Value>,
    /// True when the property does not apply to this construction.
    #[serde(default)]
    pub skipped: bool,
    /// Free-form context: vacuity statistics, search budgets, skip reasons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Accumulates one property's margins and witnesses across trials.
#[derive(Debug)]
pub struct PropertyTracker {
    property: String,
    construction: String,
    tolerance: f64,
    trials: u64,
    failures: u64,
    worst_margin: f64,
    witness: Option<Value>,
    notes: Option<String>,
}

impl PropertyTracker {
    pub fn new(property: &str, construction: &str, tolerance: f64) -> Self {
        Self {
            property: property.to_string(),
            construction: construction.to_string(),
            tolerance,
            trials: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
            witness: None,
            notes: None,
        }
    }

    /// Records one normalized margin; a margin below `-tolerance` is a
    /// failure, and the first failure freezes the witness.
    pub fn record(&mut self, margin: f64, witness: impl FnOnce() -> Value) {
        self.trials += 1;
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
        if !(margin >= -self.tolerance) && self.failures == 0 {
            self.witness = Some(witness());
        }
        if !(margin >= -self.tolerance) {
            self.failures += 1;
        }
    }

    pub fn note(&mut self, text: String) {
        self.notes = Some(text);
    }

    pub fn finish(self) -> VerificationReport {
        VerificationReport {
            property: self.property,
            construction: self.construction,
            trials: self.trials,
            failures: self.failures,
            worst_margin: if self.trials == 0 {
                0.0
            } else {
                self.worst_margin
            },
            witness: self.witness,
            skipped: false,
            notes: self.notes,
        }
    }
}

/// Report for a property that does not apply to the construction.
pub fn skipped_report(property: &str, construction: &str, reason: &str) -> VerificationReport {
    VerificationReport {
        property: property.to_string(),
        construction: construction.to_string(),
        trials: 0,
        failures: 0,
        worst_margin: 0.0,
        witness: None,
        skipped: true,
        notes: Some(reason.to_string()),
    }
}

/// JSON schema the CLI publishes for `VerificationReport` payloads.
pub fn verification_report_schema() -> Value {
    json!({
        "$schema": "http://json-schema.org/draft-07/schema#",
        "title": "VerificationReport",
        "type": "object",
        "required": ["property", "construction", "trials", "failures", "worst_margin", "witness"],
        "properties": {
            "property": {"type": "string"},
            "construction": {"type": "string"},
            "trials": {"type": "integer", "minimum": 0},
            "failures": {"type": "integer", "minimum": 0},
            "worst_margin": {"type": "number"},
            "witness": {"type": ["object", "null"]},
            "skipped": {"type": "boolean"},
            "notes": {"type": "string"},
        },
        "additionalProperties": false,
    })
}

/// Structural validation of a report value against the published schema.
pub fn validates_against_schema(v: &Value) -> bool {
    let obj = match v.as_object() {
        Some(o) => o,
        None => return false,
    };
    let required = [
        "property",
        "construction",
        "trials",
        "failures",
        "worst_margin",
        "witness",
    ];
    if !required.iter().all(|k| obj.contains_key(*k)) {
        return false;
    }
    let allowed = [
        "property",
        "construction",
        "trials",
        "failures",
        "worst_margin",
        "witness",
        "skipped",
        "notes",
    ];
    if !obj.keys().all(|k| allowed.contains(&k.as_str())) {
        return false;
    }
    obj["property"].is_string()
        && obj["construction"].is_string()
        && obj["trials"].is_u64()
        && obj["failures"].is_u64()
        && obj["worst_margin"].is_number()
        && (obj["witness"].is_object() || obj["witness"].is_null())
        && obj.get("skipped").map_or(true, Value::is_boolean)
        && obj.get("notes").map_or(true, Value::is_string)
}
