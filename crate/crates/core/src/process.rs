//! Seeded sampler for the Poisson hyperplane process restricted to the
//! hitting set of a centred ball.
//!
//! Hyperplanes `H(u, s)` are drawn from `γ ds Q(du)`. The offset axis is cut
//! into cells `|s| ∈ (kΔ, (k+1)Δ]`; each cell has its own counter-based RNG
//! stream, so the realization is a fixed function of `(model, seed)` and
//! growing the window only ever reveals more of it.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, Hyperplane};
use crate::linalg::{norm, solve_affine};
use crate::seed;

/// Width of one lazily generated offset cell.
pub const CELL_WIDTH: f64 = 1.0;

/// Directional distribution `Q` of the hyperplane normals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Directions {
    /// Uniform on the unit sphere.
    Isotropic,
    /// Finitely many directions `±u` with weights summing to one.
    Atoms { atoms: Vec<(Vec<f64>, f64)> },
}

/// The pair `(γ, Q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalModel {
    pub dim: usize,
    pub gamma: f64,
    pub directions: Directions,
}

impl DirectionalModel {
    pub fn isotropic(dim: usize, gamma: f64) -> Result<Self> {
        Self::new(dim, gamma, Directions::Isotropic)
    }

    /// Atom directions are canonicalized (one representative per `±u`),
    /// merged, and their weights normalized to sum to one.
    pub fn atoms(dim: usize, gamma: f64, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        Self::new(dim, gamma, Directions::Atoms { atoms })
    }

    pub fn new(dim: usize, gamma: f64, directions: Directions) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidModel("dimension must be >= 1".into()));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidModel(format!("intensity {gamma} must be > 0")));
        }
        let directions = match directions {
            Directions::Isotropic => Directions::Isotropic,
            Directions::Atoms { atoms } => Directions::Atoms {
                atoms: normalize_atoms(dim, atoms)?,
            },
        };
        Ok(Self {
            dim,
            gamma,
            directions,
        })
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self.directions, Directions::Isotropic)
    }

    /// Same directional distribution with a different intensity.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.dim, gamma, self.directions.clone())
    }

    /// Draws a unit normal from `Q`, with a uniform sign.
    pub fn sample_direction<R: Rng + ?Sized>(&self, rng: &mut R, picker: Option<&WeightedIndex<f64>>) -> Vec<f64> {
        let mut u = match &self.directions {
            Directions::Isotropic => loop {
                let g: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
                let n = norm(&g);
                if n > 1e-12 {
                    break g.into_iter().map(|x| x / n).collect::<Vec<f64>>();
                }
            },
            Directions::Atoms { atoms } => {
                let k = picker.expect("atom picker").sample(rng);
                atoms[k].0.clone()
            }
        };
        if rng.random::<bool>() {
            u.iter_mut().for_each(|c| *c = -*c);
        }
        u
    }

    fn picker(&self) -> Option<WeightedIndex<f64>> {
        match &self.directions {
            Directions::Isotropic => None,
            Directions::Atoms { atoms } => {
                Some(WeightedIndex::new(atoms.iter().map(|a| a.1)).expect("validated weights"))
            }
        }
    }
}

fn normalize_atoms(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Vec<(Vec<f64>, f64)>> {
    if atoms.is_empty() {
        return Err(Error::InvalidModel("no atoms given".into()));
    }
    let mut merged: Vec<(Vec<f64>, f64)> = Vec::new();
    for (u, w) in atoms {
        if u.len() != dim {
            return Err(Error::InvalidModel(format!(
                "atom {u:?} has dimension {}, expected {dim}",
                u.len()
            )));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidModel(format!("atom weight {w} must be > 0")));
        }
        let h = Hyperplane::new(u, 0.0).map_err(|_| Error::InvalidModel("zero atom direction".into()))?;
        let canon = h.normal().to_vec();
        match merged
            .iter_mut()
            .find(|(v, _)| v.iter().zip(&canon).all(|(a, b)| (a - b).abs() < 1e-12))
        {
            Some(entry) => entry.1 += w,
            None => merged.push((canon, w)),
        }
    }
    let rows: Vec<&[f64]> = merged.iter().map(|(u, _)| u.as_slice()).collect();
    let rank = solve_affine(&rows, &vec![0.0; rows.len()], 1e-9).rank;
    if rank < dim {
        return Err(Error::InvalidModel(format!(
            "atoms span a subspace of dimension {rank} < {dim} (concentrated on a great subsphere)"
        )));
    }
    let total: f64 = merged.iter().map(|a| a.1).sum();
    merged.iter_mut().for_each(|a| a.1 /= total);
    Ok(merged)
}

/// A hyperplane of the realization with its offset cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledHyperplane {
    pub hyperplane: Hyperplane,
    pub cell: usize,
}

/// Lazily extended realization of the hyperplane process.
///
/// The visible hyperplanes are those with `|s| <= current_radius`, i.e. the
/// ones hitting `B(0, current_radius)`, listed in order of increasing `|s|`.
/// That order does not depend on how the radius was reached, so indices into
/// [`WorldOracle::hyperplanes`] are stable under re-sampling with the same
/// seed.
#[derive(Clone, Debug)]
pub struct WorldOracle {
    model: DirectionalModel,
    seed: u64,
    current_radius: f64,
    cells: Vec<Vec<Hyperplane>>,
    visible: Vec<SampledHyperplane>,
}

/// Metadata written next to an exported realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationMeta {
    pub d: usize,
    pub gamma: f64,
    pub directions: Directions,
    pub seed: u64,
    pub radius: f64,
}

impl WorldOracle {
    /// Samples `η ∩ [B(0, radius)]`.
    pub fn sample_hitting(model: &DirectionalModel, radius: f64, seed: u64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParams(format!("radius {radius} must be > 0")));
        }
        let mut oracle = Self {
            model: model.clone(),
            seed,
            current_radius: 0.0,
            cells: Vec::new(),
            visible: Vec::new(),
        };
        oracle.extend_to(radius)?;
        Ok(oracle)
    }

    pub fn model(&self) -> &DirectionalModel {
        &self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.model.dim
    }

    pub fn current_radius(&self) -> f64 {
        self.current_radius
    }

    pub fn hyperplanes(&self) -> &[SampledHyperplane] {
        &self.visible
    }

    /// Grows the window to `B(0, radius)`. Hyperplanes already visible keep
    /// their values and positions; new ones (with `|s|` in the added
    /// annulus) are appended.
    pub fn extend_to(&mut self, radius: f64) -> Result<()> {
        if radius < self.current_radius {
            return Err(Error::ShrinkNotAllowed {
                current: self.current_radius,
                requested: radius,
            });
        }
        if radius == self.current_radius {
            return Ok(());
        }
        let needed = (radius / CELL_WIDTH).ceil() as usize;
        while self.cells.len() < needed {
            let k = self.cells.len();
            self.cells.push(self.sample_cell(k));
        }
        let old = self.current_radius;
        let mut fresh: Vec<SampledHyperplane> = Vec::new();
        let first_cell = (old / CELL_WIDTH).floor() as usize;
        for (k, cell) in self.cells.iter().enumerate().skip(first_cell) {
            for h in cell {
                let a = h.offset().abs();
                if a > old && a <= radius {
                    fresh.push(SampledHyperplane {
                        hyperplane: h.clone(),
                        cell: k,
                    });
                }
            }
        }
        fresh.sort_by(|a, b| {
            a.hyperplane
                .offset()
                .abs()
                .total_cmp(&b.hyperplane.offset().abs())
                .then(a.cell.cmp(&b.cell))
        });
        self.visible.extend(fresh);
        self.current_radius = radius;
        Ok(())
    }

    fn sample_cell(&self, k: usize) -> Vec<Hyperplane> {
        let mut rng = seed::stream(self.seed, k as u64);
        let mean = 2.0 * self.model.gamma * CELL_WIDTH;
        let count = Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize;
        let picker = self.model.picker();
        let lo = k as f64 * CELL_WIDTH;
        (0..count)
            .map(|_| {
                let u = self.model.sample_direction(&mut rng, picker.as_ref());
                // |s| uniform on (lo, lo + Δ]; the sign of s is carried by the
                // uniform sign of u.
                let s = lo + CELL_WIDTH * (1.0 - rng.random::<f64>());
                Hyperplane::from_unit(u, s)
            })
            .collect()
    }

    /// All visible hyperplanes meeting `body`, which must fit in the window.
    pub fn hitting_subset(&self, body: &ConvexBody) -> Result<Vec<Hyperplane>> {
        let outradius = body.outradius();
        if outradius > self.current_radius {
            return Err(Error::WindowTooSmall {
                outradius,
                radius: self.current_radius,
            });
        }
        let tol = 1e-12 * self.current_radius.max(1.0);
        Ok(self
            .visible
            .iter()
            .filter(|h| body.hits(&h.hyperplane, tol))
            .map(|h| h.hyperplane.clone())
            .collect())
    }

    pub fn meta(&self) -> RealizationMeta {
        RealizationMeta {
            d: self.model.dim,
            gamma: self.model.gamma,
            directions: self.model.directions.clone(),
            seed: self.seed,
            radius: self.current_radius,
        }
    }

    /// CSV with header `u_1,...,u_d,s`.
    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<f64>> = self.visible.iter().map(|h| h.hyperplane.to_row()).collect();
        let mut header: Vec<String> = (1..=self.dim()).map(|i| format!("u_{i}")).collect();
        header.push("s".into());
        crate::report::csv_table(&header, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_are_canonicalized_and_merged() {
        let m = DirectionalModel::atoms(
            2,
            1.0,
            vec![(vec![1.0, 0.0], 1.0), (vec![-1.0, 0.0], 1.0), (vec![0.0, 2.0], 2.0)],
        )
        .unwrap();
        let Directions::Atoms { atoms } = &m.directions else { panic!() };
        assert_eq!(atoms.len(), 2);
        assert!((atoms[0].1 - 0.5).abs() < 1e-15);
        assert_eq!(atoms[1].0, vec![0.0, 1.0]);
    }

    #[test]
    fn degenerate_atoms_are_rejected() {
        let err = DirectionalModel::atoms(2, 1.0, vec![(vec![1.0, 0.0], 1.0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
        assert!(DirectionalModel::isotropic(2, 0.0).is_err());
        assert!(DirectionalModel::atoms(2, 1.0, vec![(vec![1.0, 0.0], -1.0)]).is_err());
    }

    #[test]
    fn vertical_atoms_give_vertical_lines() {
        let m = DirectionalModel::atoms(
            2,
            1.0,
            vec![(vec![1.0, 0.0], 0.5), (vec![0.0, 1.0], 0.5)],
        )
        .unwrap();
        let o = WorldOracle::sample_hitting(&m, 20.0, 3).unwrap();
        assert!(!o.hyperplanes().is_empty());
        for h in o.hyperplanes() {
            let u = h.hyperplane.normal();
            assert!(u == [1.0, 0.0] || u == [0.0, 1.0], "{u:?}");
        }
    }

    #[test]
    fn extension_is_deterministic_and_monotone() {
        let m = DirectionalModel::isotropic(2, 1.5).unwrap();
        let direct = WorldOracle::sample_hitting(&m, 10.0, 42).unwrap();
        let mut grown = WorldOracle::sample_hitting(&m, 2.5, 42).unwrap();
        let before: Vec<SampledHyperplane> = grown.hyperplanes().to_vec();
        grown.extend_to(2.5).unwrap();
        assert_eq!(grown.hyperplanes(), before.as_slice());
        grown.extend_to(7.3).unwrap();
        assert_eq!(&grown.hyperplanes()[..before.len()], before.as_slice());
        for h in &before {
            assert!(h.hyperplane.offset().abs() <= 2.5);
        }
        grown.extend_to(10.0).unwrap();
        assert_eq!(grown.hyperplanes(), direct.hyperplanes());
        assert!(matches!(grown.extend_to(5.0), Err(Error::ShrinkNotAllowed { .. })));
        for h in direct.hyperplanes() {
            assert!(h.hyperplane.offset().abs() <= 10.0);
        }
    }

    #[test]
    fn hitting_subset_filters_by_body() {
        let m = DirectionalModel::isotropic(2, 1.0).unwrap();
        let o = WorldOracle::sample_hitting(&m, 10.0, 1).unwrap();
        let all = o.hitting_subset(&ConvexBody::ball(vec![0.0, 0.0], 10.0).unwrap()).unwrap();
        assert_eq!(all.len(), o.hyperplanes().len());
        let point = o.hitting_subset(&ConvexBody::ball(vec![0.0, 0.0], 0.0).unwrap()).unwrap();
        assert!(point.iter().all(|h| h.offset().abs() <= 1e-11));
        assert!(matches!(
            o.hitting_subset(&ConvexBody::ball(vec![5.0, 0.0], 6.0).unwrap()),
            Err(Error::WindowTooSmall { .. })
        ));
        let disk = ConvexBody::unit_ball(2);
        let x3 = Hyperplane::new(vec![1.0, 0.0], 3.0).unwrap();
        assert!(!disk.hits(&x3, 1e-12));
    }

    #[test]
    fn csv_header_and_rows() {
        let m = DirectionalModel::isotropic(3, 1.0).unwrap();
        let o = WorldOracle::sample_hitting(&m, 3.0, 9).unwrap();
        let csv = o.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("u_1,u_2,u_3,s"));
        assert_eq!(lines.count(), o.hyperplanes().len());
    }
}
