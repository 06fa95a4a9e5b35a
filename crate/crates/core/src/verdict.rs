use core::fmt;
use core::str::FromStr;

/// The three acceptance conditions for recognizer systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    /// First signal wins; `yes` and `no` must not appear in the same step.
    General,
    /// Exactly one signal, emitted in the halting step.
    Standard,
    /// Standard, and every object leads to exactly one of `yes`/`no`.
    Restricted,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::General, Condition::Standard, Condition::Restricted];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::General => "general",
            Condition::Standard => "standard",
            Condition::Restricted => "restricted",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "general" => Ok(Condition::General),
            "standard" => Ok(Condition::Standard),
            "restricted" => Ok(Condition::Restricted),
            _ => Err(()),
        }
    }
}

/// Which clause of an acceptance condition an instance broke.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    /// `yes` and `no` first released in the same step.
    SameTimestep,
    /// Neither signal is ever released.
    NoOutput,
    /// Both signals are released (or reachable).
    BothReachable,
    /// The signal was first released before the halting step.
    NotLastStep,
    /// The graph is not of the restricted shape.
    NotRestricted,
    /// Input nodes lead to different signals.
    InconsistentInSet,
    /// A cycle is reachable from the input, so the computation never halts.
    Cyclic,
    StepLimit,
    PopulationCap,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::SameTimestep => "SAME_TIMESTEP",
            ViolationCode::NoOutput => "NO_OUTPUT",
            ViolationCode::BothReachable => "BOTH_REACHABLE",
            ViolationCode::NotLastStep => "NOT_LAST_STEP",
            ViolationCode::NotRestricted => "NOT_RESTRICTED",
            ViolationCode::InconsistentInSet => "INCONSISTENT_IN_SET",
            ViolationCode::Cyclic => "CYCLIC",
            ViolationCode::StepLimit => "STEP_LIMIT",
            ViolationCode::PopulationCap => "POPULATION_CAP",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Accept,
    Reject,
    Violation(ViolationCode),
}

impl Verdict {
    pub fn is_decided(self) -> bool {
        matches!(self, Verdict::Accept | Verdict::Reject)
    }

    /// Swaps the roles of `yes` and `no`.
    pub fn flipped(self) -> Verdict {
        match self {
            Verdict::Accept => Verdict::Reject,
            Verdict::Reject => Verdict::Accept,
            v => v,
        }
    }
}

/// `ACCEPT`, `REJECT` or `VIOLATION(<code>)`.
impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => f.write_str("ACCEPT"),
            Verdict::Reject => f.write_str("REJECT"),
            Verdict::Violation(code) => write!(f, "VIOLATION({code})"),
        }
    }
}
