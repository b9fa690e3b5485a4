//! Frames of previously accepted directions and the branches ("patterns") of
//! the strongly orthogonal feasible set they induce.
//!
//! A unit vector whose inner products with an orthonormal set `V_j` all lie
//! in `{−1, 0, 1}` is either `±v` for some `v ∈ V_j` or orthogonal to all of
//! `span(V_j)`. So every feasible point of the constrained step picks, per
//! mode, one frame direction or the orthogonal complement; the product
//! condition then only excludes all-pinned choices that repeat a recorded
//! component.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::project_out;
use crate::sod::{mode_directions, validate, Decomposition};
use crate::tensor::{dot, norm, MultiVector, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    Pinned { direction: usize, sign: i8 },
    Complement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pattern(pub Vec<ModeChoice>);

impl Pattern {
    pub fn choices(&self) -> &[ModeChoice] {
        &self.0
    }

    pub fn all_pinned(&self) -> bool {
        self.0.iter().all(|c| matches!(c, ModeChoice::Pinned { .. }))
    }

    pub fn complement_modes(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c, ModeChoice::Complement))
            .map(|(j, _)| j)
            .collect()
    }
}

/// Per-mode orthonormal directions `V_j` and, for every recorded component,
/// its direction index and sign in each mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Frames {
    dims: Vec<usize>,
    directions: Vec<Vec<Vec<f64>>>,
    components: Vec<Vec<(usize, i8)>>,
}

impl Frames {
    pub fn new(shape: &Shape) -> Self {
        Frames {
            dims: shape.dims().to_vec(),
            directions: vec![Vec::new(); shape.order()],
            components: Vec::new(),
        }
    }

    /// Frames of a (partial) SOD, e.g. the first `k` GSOD components.
    pub fn from_decomposition(d: &Decomposition, tol_orth: f64) -> Result<Self> {
        let report = validate(d, tol_orth);
        if !report.is_sod {
            return Err(Error::NotStronglyOrthogonal(format!(
                "{} offending pairs",
                report.offending_pairs.len()
            )));
        }
        let p = d.shape().order();
        let mut frames = Frames::new(d.shape());
        let mut components = vec![Vec::with_capacity(p); d.len()];
        for j in 0..p {
            let (dirs, assignment) = mode_directions(d, j, tol_orth)?;
            for (k, &idx) in assignment.iter().enumerate() {
                let s = dot(&dirs[idx], d.terms()[k].factors.part(j));
                components[k].push((idx, if s < 0.0 { -1 } else { 1 }));
            }
            frames.directions[j] = dirs;
        }
        frames.components = components;
        Ok(frames)
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn directions(&self, mode: usize) -> &[Vec<f64>] {
        &self.directions[mode]
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// `(direction index, sign)` per mode for each recorded component.
    pub fn components(&self) -> &[Vec<(usize, i8)>] {
        &self.components
    }

    pub fn complement_dim(&self, mode: usize) -> usize {
        self.dims[mode] - self.directions[mode].len()
    }

    pub fn is_feasible(&self, pattern: &Pattern) -> bool {
        if !pattern.all_pinned() {
            return true;
        }
        let tuple: Vec<usize> = pattern
            .choices()
            .iter()
            .map(|c| match c {
                ModeChoice::Pinned { direction, .. } => *direction,
                ModeChoice::Complement => unreachable!(),
            })
            .collect();
        self.components
            .iter()
            .all(|comp| comp.iter().zip(&tuple).any(|((d, _), t)| d != t))
    }

    /// Records an accepted component found on `pattern`. Complement factors
    /// are re-orthogonalized against the frame and appended as new
    /// directions; pinned factors are snapped onto their direction. Returns
    /// the snapped factors.
    pub fn record(&mut self, w: &MultiVector, pattern: &Pattern) -> MultiVector {
        let mut snapped = Vec::with_capacity(self.order());
        let mut entry = Vec::with_capacity(self.order());
        for (j, choice) in pattern.choices().iter().enumerate() {
            match *choice {
                ModeChoice::Pinned { direction, .. } => {
                    let v = &self.directions[j][direction];
                    let sign: i8 = if dot(v, w.part(j)) < 0.0 { -1 } else { 1 };
                    snapped.push(v.iter().map(|x| f64::from(sign) * x).collect());
                    entry.push((direction, sign));
                }
                ModeChoice::Complement => {
                    let mut v = w.part(j).to_vec();
                    project_out(&mut v, &self.directions[j]);
                    let len = norm(&v);
                    v.iter_mut().for_each(|x| *x /= len);
                    self.directions[j].push(v.clone());
                    entry.push((self.directions[j].len() - 1, 1));
                    snapped.push(v);
                }
            }
        }
        self.components.push(entry);
        MultiVector::new(snapped).expect("snapped factors are finite")
    }
}

/// Every feasible pattern, mode 1 varying slowest. Per mode the pinned
/// choices come first by direction index, then the complement when it is
/// nonempty. Pinned signs are always `+1`: the maximization absorbs signs
/// with an odd flip, so one representative per sign class suffices.
pub fn enumerate_patterns(frames: &Frames) -> Vec<Pattern> {
    let per_mode: Vec<Vec<ModeChoice>> = (0..frames.order())
        .map(|j| {
            let mut options: Vec<ModeChoice> = (0..frames.directions(j).len())
                .map(|direction| ModeChoice::Pinned { direction, sign: 1 })
                .collect();
            if frames.complement_dim(j) >= 1 {
                options.push(ModeChoice::Complement);
            }
            options
        })
        .collect();
    let mut out = vec![Vec::with_capacity(frames.order())];
    for options in &per_mode {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&c| {
                    let mut next = prefix.clone();
                    next.push(c);
                    next
                })
            })
            .collect();
    }
    out.into_iter()
        .map(Pattern)
        .filter(|p| frames.is_feasible(p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sod::Term;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    fn decomposition(shape: &[usize], idx: &[&[usize]]) -> Decomposition {
        let terms = idx
            .iter()
            .map(|a| Term {
                sigma: 1.0,
                factors: MultiVector::new(
                    a.iter().zip(shape).map(|(&i, &n)| e(n, i)).collect(),
                )
                .unwrap(),
            })
            .collect();
        Decomposition::new(Shape::new(shape.to_vec()).unwrap(), terms).unwrap()
    }

    #[test]
    fn empty_frames_give_the_unconstrained_pattern() {
        let frames = Frames::new(&Shape::new(vec![2, 3, 2]).unwrap());
        let patterns = enumerate_patterns(&frames);
        assert_eq!(patterns, vec![Pattern(vec![ModeChoice::Complement; 3])]);
    }

    #[test]
    fn one_component_excludes_only_its_own_tuple() {
        let frames = Frames::from_decomposition(&decomposition(&[2, 2, 2], &[&[0, 0, 0]]), 1e-8).unwrap();
        let patterns = enumerate_patterns(&frames);
        // Brute force: 2 choices per mode, minus the all-pinned copy of the component.
        assert_eq!(patterns.len(), 7);
        assert!(patterns.contains(&Pattern(vec![ModeChoice::Complement; 3])));
        assert!(!patterns.iter().any(Pattern::all_pinned));
        assert_eq!(
            patterns[0].choices(),
            &[
                ModeChoice::Pinned { direction: 0, sign: 1 },
                ModeChoice::Pinned { direction: 0, sign: 1 },
                ModeChoice::Complement
            ]
        );
    }

    #[test]
    fn full_frames_leave_the_unrecorded_tuples() {
        let idx: &[&[usize]] = &[&[0, 0, 0], &[0, 1, 1], &[1, 0, 1], &[1, 1, 0]];
        let frames = Frames::from_decomposition(&decomposition(&[2, 2, 2], idx), 1e-8).unwrap();
        let patterns = enumerate_patterns(&frames);
        let mut tuples: Vec<Vec<usize>> = patterns
            .iter()
            .map(|p| {
                p.choices()
                    .iter()
                    .map(|c| match c {
                        ModeChoice::Pinned { direction, .. } => *direction,
                        ModeChoice::Complement => panic!("no complement left"),
                    })
                    .collect()
            })
            .collect();
        tuples.sort();
        let mut expected: Vec<Vec<usize>> = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let t = vec![a, b, c];
                    if !idx.iter().any(|r| *r == t.as_slice()) {
                        expected.push(t);
                    }
                }
            }
        }
        assert_eq!(tuples, expected);
    }

    #[test]
    fn record_appends_complement_directions() {
        let shape = Shape::new(vec![3, 2]).unwrap();
        let mut frames = Frames::new(&shape);
        let w = MultiVector::new(vec![e(3, 1), vec![0.0, -1.0]]).unwrap();
        let snapped = frames.record(&w, &Pattern(vec![ModeChoice::Complement; 2]));
        assert_eq!(snapped, w);
        assert_eq!(frames.directions(0).len(), 1);
        let pattern = Pattern(vec![ModeChoice::Pinned { direction: 0, sign: 1 }, ModeChoice::Complement]);
        let w2 = MultiVector::new(vec![vec![0.0, -1.0, 0.0], e(2, 0)]).unwrap();
        let snapped = frames.record(&w2, &pattern);
        assert_eq!(snapped.part(0), &[0.0, -1.0, 0.0]);
        assert_eq!(frames.components()[1][0], (0, -1));
        assert_eq!(frames.complement_dim(1), 0);
    }
}
