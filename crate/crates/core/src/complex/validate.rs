use std::collections::HashSet;
use std::fmt;

use super::Triangulation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub location: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.rule, self.location)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, rule: &'static str, location: impl Into<String>) {
        self.violations.push(Violation {
            rule,
            location: location.into(),
        });
    }
}

impl Triangulation {
    /// Recheck every structural invariant from scratch.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        if self.degree_bound() <= 6 {
            report.push("degree-bound", format!("d = {}", self.degree_bound()));
        }

        let mut pairs = HashSet::with_capacity(self.num_darts());
        for d in self.darts() {
            let t = self.twin(d);
            if t == d || self.twin(t) != d {
                report.push("twin-involution", self.dart_name(d));
            }
            if self.tail(d) == self.head(d) {
                report.push("no-loops", self.dart_name(d));
            }
            if self.tail(t) != self.head(d) {
                report.push("twin-endpoints", self.dart_name(d));
            }
            if !pairs.insert((self.tail(d), self.head(d))) {
                report.push("unique-dart", self.dart_name(d));
            }
            if self.is_boundary_dart(d) && self.is_boundary_dart(t) {
                report.push("isolated-edge", self.dart_name(d));
            }
            if let Some(n) = self.face_next(d) {
                let n3 = self.face_next(self.face_next(n).unwrap()).unwrap();
                if n3 != d {
                    report.push("face-length", self.dart_name(d));
                }
                if self.head(d) != self.tail(n) {
                    report.push("face-chain", self.dart_name(d));
                }
            }
        }

        for v in self.vertices() {
            let deg = self.degree(v);
            if deg > self.degree_bound() {
                report.push(
                    "degree",
                    format!("vertex {} has degree {}", self.label(v), deg),
                );
            }
            let out = self.out_darts(v);
            for (i, &d) in out.iter().enumerate() {
                if self.tail(d) != v {
                    report.push("rotation", self.dart_name(d));
                }
                let next = out[(i + 1) % out.len()];
                if let Some(r) = self.rot_ccw(d) {
                    if r != next {
                        report.push("rotation", self.dart_name(d));
                    }
                }
            }
        }

        if !self.is_connected() {
            report.push("connected", "whole complex");
        }
        if self.is_closed() && self.euler_characteristic() != 2 {
            report.push(
                "euler-characteristic",
                format!("chi = {}", self.euler_characteristic()),
            );
        }
        report
    }
}
