use std::fmt;

/// Which side of the bound the measurement must lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    AtMost,
    AtLeast,
}

/// A measured quantity checked against an explicit bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    /// `bound - measured` for upper bounds, `measured - bound` for floors.
    pub margin: f64,
    pub direction: Direction,
    pub pass: bool,
    /// Free-form parameters, seed and notes.
    pub context: String,
}

impl BoundReport {
    /// `pass` is set iff `bound - measured >= 0`; NaN on either side fails.
    pub fn new(name: impl Into<String>, measured: f64, bound: f64, context: impl Into<String>) -> Self {
        let margin = bound - measured;
        let pass = if bound == f64::INFINITY {
            !measured.is_nan()
        } else {
            margin >= 0.0
        };
        Self {
            name: name.into(),
            measured,
            bound,
            margin,
            direction: Direction::AtMost,
            pass,
            context: context.into(),
        }
    }

    /// `measured >= floor`; NaN fails.
    pub fn at_least(name: impl Into<String>, measured: f64, floor: f64, context: impl Into<String>) -> Self {
        let margin = measured - floor;
        Self {
            name: name.into(),
            measured,
            bound: floor,
            margin,
            direction: Direction::AtLeast,
            pass: margin >= 0.0,
            context: context.into(),
        }
    }

    pub const CSV_HEADER: &'static str = "name,measured,bound,margin,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{:?},{:?},{}",
            self.name, self.measured, self.bound, self.margin, self.pass
        )
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: measured {:.6e} {} bound {:.6e} (margin {:.3e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            match self.direction {
                Direction::AtMost => "<=",
                Direction::AtLeast => ">=",
            },
            self.bound,
            self.margin
        )?;
        if !self.context.is_empty() {
            write!(f, " {{{}}}", self.context)?;
        }
        Ok(())
    }
}

/// CSV table of reports.
pub fn reports_to_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from(BoundReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
