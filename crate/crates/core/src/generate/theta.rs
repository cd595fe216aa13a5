use std::collections::HashMap;
use std::fmt;

use super::{glue_double, GenerateError};
use crate::complex::{Triangulation, TriangulationBuilder};
use crate::morph::{Omega, Patch};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    /// Boundary vertex of degree 3.
    A,
    /// Boundary vertex of degree 4.
    B,
}

/// Cyclic word over `{A, B}`, stored at its lexicographically least
/// rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundaryWord {
    letters: Vec<Letter>,
}

impl BoundaryWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        let s = least_rotation(&letters);
        let mut letters = letters;
        letters.rotate_left(s);
        Self { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn count(&self, l: Letter) -> usize {
        self.letters.iter().filter(|&&x| x == l).count()
    }

    /// Image under `A -> BAA`, `B -> BA`.
    pub fn substitute(&self) -> Self {
        let mut out = Vec::with_capacity(3 * self.letters.len());
        for &l in &self.letters {
            match l {
                Letter::A => out.extend([Letter::B, Letter::A, Letter::A]),
                Letter::B => out.extend([Letter::B, Letter::A]),
            }
        }
        Self::new(out)
    }
}

impl fmt::Display for BoundaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            f.write_str(match l {
                Letter::A => "A",
                Letter::B => "B",
            })?;
        }
        Ok(())
    }
}

/// Start of the lexicographically least rotation (Booth's algorithm); the
/// earliest start wins ties.
fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let mut f: Vec<isize> = vec![-1; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = &s[j % n];
        let mut i = f[j - k - 1];
        while i != -1 && *sj != s[(k + i as usize + 1) % n] {
            if *sj < s[(k + i as usize + 1) % n] {
                k = j - i as usize - 1;
            }
            i = f[i as usize];
        }
        if i == -1 && *sj != s[(k + i.wrapping_add(1) as usize) % n] {
            if *sj < s[k % n] {
                k = j;
            }
            f[j - k] = -1;
        } else {
            f[j - k] = i + 1;
        }
    }
    k % n
}

/// Read the boundary of a disk as a cyclic `A`/`B` word.
pub fn boundary_word(a: &Patch) -> Result<BoundaryWord, GenerateError> {
    let t = &a.tri;
    let cycles = t.boundary_cycle_vertices();
    if cycles.len() != 1 || t.euler_characteristic() != 1 {
        return Err(GenerateError::NotDisk(format!(
            "{} boundary components",
            cycles.len()
        )));
    }
    let letters = cycles[0]
        .iter()
        .map(|&v| match t.degree(v) {
            3 => Ok(Letter::A),
            4 => Ok(Letter::B),
            degree => Err(GenerateError::UnexpectedDegree {
                vertex: t.label(v),
                degree,
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BoundaryWord::new(letters))
}

/// The disk `theta_n`: a degree-7 vertex (label 0) with `n - 1` rings
/// grown around it. Each ring puts a triangle on every boundary edge and
/// then fills in new neighbours until every old boundary vertex has degree
/// 7. Marked at `0 -> 1`.
pub fn theta(n: usize) -> Result<Patch, GenerateError> {
    if n == 0 {
        return Err(GenerateError::InvalidParameter("n must be at least 1".into()));
    }
    let mut faces: Vec<[i64; 3]> = (0..7).map(|i| [0, 1 + i, 1 + (i + 1) % 7]).collect();
    let mut boundary: Vec<i64> = (1..=7).collect();
    let mut degree: HashMap<i64, usize> = boundary.iter().map(|&v| (v, 3)).collect();
    let mut next = 8i64;

    for _ in 1..n {
        let len = boundary.len();
        // apex of the triangle on edge (u_i, u_{i+1})
        let edge_apex: Vec<i64> = (0..len).map(|i| next + i as i64).collect();
        next += len as i64;
        let mut new_boundary = Vec::with_capacity(3 * len);
        for i in 0..len {
            let (u, w) = (boundary[i], boundary[(i + 1) % len]);
            faces.push([w, u, edge_apex[i]]);
        }
        for i in 0..len {
            let u = boundary[i];
            let extra = 5usize.checked_sub(degree[&u]).ok_or(GenerateError::UnexpectedDegree {
                vertex: u,
                degree: degree[&u],
            })?;
            let mut chain = vec![edge_apex[(i + len - 1) % len]];
            for _ in 0..extra {
                chain.push(next);
                new_boundary.push(next);
                degree.insert(next, 3);
                next += 1;
            }
            chain.push(edge_apex[i]);
            for pair in chain.windows(2) {
                faces.push([u, pair[0], pair[1]]);
            }
            new_boundary.push(edge_apex[i]);
            degree.insert(edge_apex[i], 4);
        }
        for &u in &boundary {
            degree.remove(&u);
        }
        boundary = new_boundary;
    }

    let tri = TriangulationBuilder::new(faces).build()?;
    let marked = tri.dart_by_labels(0, 1).unwrap();
    Ok(Patch {
        tri,
        marked,
        omega: Omega::Exact,
    })
}

/// `Theta_k`: two copies of `theta_k` glued along their boundary.
pub fn hyperbolic_sphere(k: usize) -> Result<Triangulation, GenerateError> {
    glue_double(&theta(k)?)
}
