use rayon::prelude::*;

use super::{LatticeChart, LatticeError};
use crate::cmat::{CMat, C64};

/// One `r×r` complex matrix per lattice site.
#[derive(Clone, Debug, PartialEq)]
pub struct EndoField {
    rank: usize,
    data: Vec<CMat>,
}

/// A field of positive-definite Hermitian matrices (a bundle metric).
pub type MetricField = EndoField;

impl EndoField {
    pub fn zeros(rank: usize, len: usize) -> Self {
        EndoField { rank, data: vec![CMat::zeros(rank); len] }
    }

    pub fn identity(rank: usize, len: usize) -> Self {
        EndoField { rank, data: vec![CMat::identity(rank); len] }
    }

    pub fn from_vec(rank: usize, data: Vec<CMat>) -> Self {
        debug_assert!(data.iter().all(|m| m.dim() == rank));
        EndoField { rank, data }
    }

    pub fn from_fn(rank: usize, len: usize, f: impl Fn(usize) -> CMat + Sync + Send) -> Self {
        EndoField { rank, data: (0..len).into_par_iter().map(f).collect() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[CMat] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [CMat] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<CMat> {
        self.data
    }

    /// Applies `f` site by site.
    pub fn map(&self, f: impl Fn(&CMat) -> CMat + Sync + Send) -> Self {
        EndoField { rank: self.rank, data: self.data.par_iter().map(f).collect() }
    }

    /// Combines two fields site by site.
    pub fn zip_map(&self, o: &EndoField, f: impl Fn(&CMat, &CMat) -> CMat + Sync + Send) -> Self {
        assert_eq!(self.len(), o.len());
        EndoField {
            rank: self.rank,
            data: self.data.par_iter().zip(&o.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, o: &EndoField) -> Self {
        self.zip_map(o, |a, b| *a + *b)
    }

    pub fn sub(&self, o: &EndoField) -> Self {
        self.zip_map(o, |a, b| *a - *b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| a.scale(s))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        self.map(|a| a.scale_c(s))
    }

    /// Largest per-site Frobenius norm.
    pub fn sup_norm(&self) -> f64 {
        self.data.par_iter().map(|m| m.norm()).reduce(|| 0.0, f64::max)
    }

    /// Largest entry of `A − B` over all sites.
    pub fn max_abs_diff(&self, o: &EndoField) -> f64 {
        self.data
            .par_iter()
            .zip(&o.data)
            .map(|(a, b)| (*a - *b).max_abs())
            .reduce(|| 0.0, f64::max)
    }

    /// Restriction to a contiguous range of sites.
    pub fn restrict(&self, sites: std::ops::Range<usize>) -> Self {
        EndoField { rank: self.rank, data: self.data[sites].to_vec() }
    }

    pub fn check_len(&self, chart: &LatticeChart) -> Result<(), LatticeError> {
        if self.len() != chart.len() {
            return Err(LatticeError::SizeMismatch { expected: chart.len(), found: self.len() });
        }
        Ok(())
    }

    /// Checks the metric invariants: finite, Hermitian to `1e−12` relative,
    /// positive definite.
    pub fn validate_metric(&self) -> Result<(), LatticeError> {
        let bad = self.data.par_iter().enumerate().find_map_any(|(site, h)| {
            if !h.is_finite() {
                return Some(LatticeError::NonFinite { site });
            }
            let herm = (*h - h.adjoint()).max_abs() <= 1e-12 * h.max_abs().max(1.0);
            if !herm || h.eigh().min() <= 0.0 {
                return Some(LatticeError::SingularMetric { site });
            }
            None
        });
        match bad {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Largest `|det H − 1|` over all sites.
    pub fn max_det_defect(&self) -> f64 {
        self.data
            .par_iter()
            .map(|h| (h.det() - C64::new(1.0, 0.0)).norm())
            .reduce(|| 0.0, f64::max)
    }
}

impl std::ops::Index<usize> for EndoField {
    type Output = CMat;
    fn index(&self, i: usize) -> &CMat {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for EndoField {
    fn index_mut(&mut self, i: usize) -> &mut CMat {
        &mut self.data[i]
    }
}

/// One [`EndoField`] per complex direction: the `dz̄ʲ` (or `dzʲ`)
/// components of an endomorphism-valued 1-form.
#[derive(Clone, Debug, PartialEq)]
pub struct OneFormField {
    pub comps: Vec<EndoField>,
}

impl OneFormField {
    pub fn zeros(dirs: usize, rank: usize, len: usize) -> Self {
        OneFormField { comps: vec![EndoField::zeros(rank, len); dirs] }
    }

    pub fn dirs(&self) -> usize {
        self.comps.len()
    }

    pub fn rank(&self) -> usize {
        self.comps[0].rank()
    }

    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().map(|c| c.sup_norm()).fold(0.0, f64::max)
    }
}
