use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{OperatorError, OperatorMatrix};
use crate::complex::{ball, Triangulation, Vertex};
use crate::morph::{canonical_traversal, vertex_code, CanonicalCode, Patch, Traversal};

/// One row of a local rule: the inner-product weight of the centre and the
/// coefficients keyed by breadth-first position in the canonical ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalRow {
    pub weight: f64,
    pub entries: Vec<(u32, Complex64)>,
}

impl LocalRow {
    /// `δ_x ↦ c δ_x` with unit weight.
    pub fn scalar(c: f64) -> Self {
        Self {
            weight: 1.0,
            entries: vec![(0, Complex64::new(c, 0.0))],
        }
    }
}

/// A finite-hopping-range operator given by its rows on each ball class.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LocalRule {
    pub hopping_range: usize,
    pub with_decorations: bool,
    pub table: BTreeMap<CanonicalCode, LocalRow>,
    /// A ball of each tabulated class, centred at the tail of its marked
    /// dart. Needed to write the rule to a file.
    pub balls: BTreeMap<CanonicalCode, Patch>,
    pub default: Option<LocalRow>,
}

fn centred(t: &Triangulation, v: Vertex, r: usize, with_dec: bool) -> (CanonicalCode, Traversal) {
    let (code, d) = vertex_code(t, v, r, with_dec);
    (code, canonical_traversal(t, d, r, with_dec).1)
}

fn representative(t: &Triangulation, v: Vertex, r: usize, with_dec: bool) -> Patch {
    ball(t, vertex_code(t, v, r, with_dec).1, r)
}

impl LocalRule {
    pub fn new(hopping_range: usize, with_decorations: bool) -> Self {
        Self {
            hopping_range,
            with_decorations,
            ..Self::default()
        }
    }

    pub fn with_default(mut self, row: LocalRow) -> Self {
        self.default = Some(row);
        self
    }

    /// Tabulate `f` on every ball class of `t`. `f` sees the host and the
    /// canonical traversal of the ball; positions index `traversal.order`.
    pub fn tabulate(
        t: &Triangulation,
        hopping_range: usize,
        with_decorations: bool,
        f: impl Fn(&Triangulation, &Traversal) -> LocalRow,
    ) -> Self {
        let mut rule = Self::new(hopping_range, with_decorations);
        for v in t.vertices() {
            let (code, tr) = centred(t, v, hopping_range, with_decorations);
            if !rule.table.contains_key(&code) {
                rule.table.insert(code.clone(), f(t, &tr));
                rule.balls.insert(code, representative(t, v, hopping_range, with_decorations));
            }
        }
        rule
    }

    /// Read the rows of `h` off `t`, one per ball class. Fails if two
    /// isomorphic balls carry different rows or a row leaves its ball.
    pub fn from_operator(
        t: &Triangulation,
        h: &OperatorMatrix,
        hopping_range: usize,
        with_decorations: bool,
    ) -> Result<Self, OperatorError> {
        let mut rule = Self::new(hopping_range, with_decorations);
        for v in t.vertices() {
            let (code, tr) = centred(t, v, hopping_range, with_decorations);
            let mut entries = Vec::new();
            for (j, c) in h.row(v.idx()) {
                let p = tr.index_of(Vertex(j as u32)).ok_or(OperatorError::RowOutsideBall {
                    position: u32::MAX,
                    size: tr.len(),
                })?;
                entries.push((p, c));
            }
            entries.sort_unstable_by_key(|e| e.0);
            let row = LocalRow {
                weight: h.weights()[v.idx()],
                entries,
            };
            match rule.table.get(&code) {
                Some(old) if !rows_close(old, &row) => {
                    return Err(OperatorError::InconsistentRule(code.to_hex()));
                }
                Some(_) => {}
                None => {
                    rule.balls.insert(code.clone(), representative(t, v, hopping_range, with_decorations));
                    rule.table.insert(code, row);
                }
            }
        }
        Ok(rule)
    }

    /// Add the row for the class of `ball` around the tail of its marked
    /// dart. Positions refer to the canonical traversal of that ball.
    pub fn insert(&mut self, ball: Patch, row: LocalRow) -> CanonicalCode {
        let centre = ball.tri.tail(ball.marked);
        let (code, _) = vertex_code(&ball.tri, centre, self.hopping_range, self.with_decorations);
        self.table.insert(code.clone(), row);
        self.balls.insert(code.clone(), ball);
        code
    }

    pub fn row_for(&self, code: &CanonicalCode) -> Option<&LocalRow> {
        self.table.get(code).or(self.default.as_ref())
    }
}

fn rows_close(a: &LocalRow, b: &LocalRow) -> bool {
    const TOL: f64 = 1e-12;
    (a.weight - b.weight).abs() <= TOL * a.weight.abs().max(1.0)
        && a.entries.len() == b.entries.len()
        && a
            .entries
            .iter()
            .zip(&b.entries)
            .all(|(x, y)| x.0 == y.0 && (x.1 - y.1).norm() <= TOL)
}

/// Assemble the operator of `rule` on `t`.
pub fn local_rule_matrix(t: &Triangulation, rule: &LocalRule) -> Result<OperatorMatrix, OperatorError> {
    let r = rule.hopping_range;
    let rows: Vec<(f64, Vec<(usize, Complex64)>)> = t
        .vertices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&v| {
            let (code, tr) = centred(t, v, r, rule.with_decorations);
            let row = rule
                .row_for(&code)
                .ok_or_else(|| OperatorError::MissingBallClass(code.to_hex()))?;
            let entries = row
                .entries
                .iter()
                .map(|&(p, c)| {
                    tr.order
                        .get(p as usize)
                        .map(|u| (u.idx(), c))
                        .ok_or(OperatorError::RowOutsideBall {
                            position: p,
                            size: tr.len(),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((row.weight, entries))
        })
        .collect::<Result<_, OperatorError>>()?;
    let (w, rows) = rows.into_iter().unzip();
    Ok(OperatorMatrix::from_rows(rows, w, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::double_grid;
    use crate::operator::{laplacian, DecorationSchema};

    #[test]
    fn laplacian_rule_reproduces_laplacian() {
        let s = double_grid(4, 3).unwrap();
        let h = laplacian(&s, DecorationSchema::Natural).unwrap();
        let rule = LocalRule::from_operator(&s, &h, 1, false).unwrap();
        assert!(rule.table.len() >= 2);
        let g = local_rule_matrix(&s, &rule).unwrap();
        assert_eq!(g.weights(), h.weights());
        for i in 0..s.num_vertices() {
            for (j, v) in h.row(i) {
                assert!((g.get(i, j) - v).norm() < 1e-15);
            }
        }
        assert_eq!(g.nnz(), h.nnz());
    }

    #[test]
    fn identity_rule() {
        let s = double_grid(2, 0).unwrap();
        let rule = LocalRule::new(0, false).with_default(LocalRow::scalar(1.0));
        let g = local_rule_matrix(&s, &rule).unwrap();
        for i in 0..s.num_vertices() {
            assert_eq!(g.row(i).collect::<Vec<_>>(), vec![(i, Complex64::new(1.0, 0.0))]);
        }
    }

    #[test]
    fn averaging_rule_is_class_invariant() {
        let s = double_grid(5, 11).unwrap();
        let rule = LocalRule::tabulate(&s, 2, true, |_, tr| LocalRow {
            weight: 1.0,
            entries: (0..tr.len() as u32)
                .map(|p| (p, Complex64::new(1.0 / tr.len() as f64, 0.0)))
                .collect(),
        });
        let g = local_rule_matrix(&s, &rule).unwrap();
        let mut by_class: BTreeMap<CanonicalCode, Vec<usize>> = BTreeMap::new();
        for v in s.vertices() {
            by_class.entry(vertex_code(&s, v, 2, true).0).or_default().push(v.idx());
        }
        for members in by_class.values() {
            let sums: Vec<Vec<u64>> = members
                .iter()
                .map(|&i| {
                    let mut vals: Vec<u64> = g.row(i).map(|(_, c)| c.re.to_bits()).collect();
                    vals.sort_unstable();
                    vals
                })
                .collect();
            assert!(sums.windows(2).all(|w| w[0] == w[1]));
        }
        for i in 0..s.num_vertices() {
            let total: f64 = g.row(i).map(|(_, c)| c.re).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_class_is_named() {
        let s = double_grid(2, 0).unwrap();
        let err = local_rule_matrix(&s, &LocalRule::new(1, false)).unwrap_err();
        assert!(matches!(err, OperatorError::MissingBallClass(ref hex) if !hex.is_empty()));
    }
}
