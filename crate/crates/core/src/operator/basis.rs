//! Operator bases: Pauli strings on spin-½ chains and the Gell-Mann matrices.

use std::fmt;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::operator::{HermitianOperator, Observable};
use crate::scalar::{c, re, Real, C};
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Tensor product of single-site Pauli matrices on an `L`-site chain.
///
/// Site 1 is the leftmost tensor factor, i.e. the most significant bit of the
/// computational basis index. The action on a basis state is a signed
/// permutation: `P|b> = i^{n_y} (-1)^{|b & z|} |b ^ x>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    sites: usize,
    factors: Vec<(usize, Axis)>,
    x_mask: u64,
    z_mask: u64,
    n_y: u32,
}

impl PauliString {
    pub const MAX_SITES: usize = 62;

    /// `factors` maps 1-based sites to axes; each site may appear once.
    pub fn new(sites: usize, factors: &[(usize, Axis)]) -> Result<Self> {
        if sites == 0 || sites > Self::MAX_SITES {
            return Err(Error::InvalidParameter(format!("chain length {sites} out of range")));
        }
        let mut sorted = factors.to_vec();
        sorted.sort();
        let (mut x_mask, mut z_mask, mut n_y) = (0u64, 0u64, 0u32);
        for (k, &(site, axis)) in sorted.iter().enumerate() {
            if site == 0 || site > sites {
                return Err(Error::InvalidParameter(format!("site {site} out of range 1..={sites}")));
            }
            if k > 0 && sorted[k - 1].0 == site {
                return Err(Error::InvalidParameter(format!("site {site} listed twice")));
            }
            let bit = 1u64 << (sites - site);
            match axis {
                Axis::X => x_mask |= bit,
                Axis::Z => z_mask |= bit,
                Axis::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    n_y += 1;
                }
            }
        }
        Ok(Self { sites, factors: sorted, x_mask, z_mask, n_y })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        1usize << self.sites
    }

    /// Compact label such as `zz@1,2`.
    pub fn label(&self) -> String {
        if self.factors.is_empty() {
            return "id".to_string();
        }
        let axes: String = self.factors.iter().map(|(_, a)| a.letter()).collect();
        let sites: Vec<String> = self.factors.iter().map(|(s, _)| s.to_string()).collect();
        format!("{axes}@{}", sites.join(","))
    }

    /// Column of the matrix for basis state `b`: returns the row index and entry.
    #[inline]
    pub(crate) fn action<T: Real>(&self, b: usize) -> (usize, C<T>) {
        let sign_neg = ((b as u64) & self.z_mask).count_ones() % 2 == 1;
        let s = if sign_neg { -T::one() } else { T::one() };
        let phase = match self.n_y % 4 {
            0 => c(s, T::zero()),
            1 => c(T::zero(), s),
            2 => c(-s, T::zero()),
            _ => c(T::zero(), -s),
        };
        (b ^ self.x_mask as usize, phase)
    }

    /// Adds `coeff * P` into a dense matrix.
    pub(crate) fn accumulate_into<T: Real>(&self, coeff: T, m: &mut Mat<C<T>>) {
        for b in 0..self.dim() {
            let (row, ph) = self.action::<T>(b);
            m[(row, b)] += ph * coeff;
        }
    }

    pub fn to_operator<T: Real>(&self) -> Result<HermitianOperator<T>> {
        Tolerances::for_precision::<T>().check_dim(self.dim())?;
        let mut m = Mat::zeros(self.dim(), self.dim());
        self.accumulate_into(T::one(), &mut m);
        Ok(HermitianOperator::symmetrized(m))
    }
}

impl<T: Real> Observable<T> for PauliString {
    fn dim(&self) -> usize {
        PauliString::dim(self)
    }

    fn apply(&self, states: MatRef<'_, C<T>>) -> Result<Mat<C<T>>> {
        check_dims("Pauli string", PauliString::dim(self), states.nrows())?;
        let mut out = Mat::zeros(states.nrows(), states.ncols());
        let d = PauliString::dim(self);
        let actions: Vec<(usize, C<T>)> = (0..d).map(|b| self.action::<T>(b)).collect();
        for j in 0..states.ncols() {
            let col = out.col_as_slice_mut(j);
            for (b, &(row, ph)) in actions.iter().enumerate() {
                col[row] = ph * states[(b, j)];
            }
        }
        Ok(out)
    }

    fn to_operator(&self) -> Result<HermitianOperator<T>> {
        PauliString::to_operator(self)
    }

    fn column_inner(&self, states: MatRef<'_, C<T>>) -> Result<(Vec<T>, T)> {
        let d = PauliString::dim(self);
        check_dims("Pauli string", d, states.nrows())?;
        let actions: Vec<(usize, C<T>)> = (0..d).map(|b| self.action::<T>(b)).collect();
        let mut worst = T::zero();
        let vals = (0..states.ncols())
            .map(|j| {
                let mut acc = C::new(T::zero(), T::zero());
                for (b, &(row, ph)) in actions.iter().enumerate() {
                    acc += states[(row, j)].conj() * ph * states[(b, j)];
                }
                worst = worst.max(acc.im.abs());
                acc.re
            })
            .collect();
        Ok((vals, worst))
    }
}

/// Dense Pauli-string operator on `sites` spins.
pub fn pauli_string<T: Real>(sites: usize, factors: &[(usize, Axis)]) -> Result<HermitianOperator<T>> {
    PauliString::new(sites, factors)?.to_operator()
}

/// Standard Gell-Mann matrix `λ_j`, `j ∈ 1..=8`, normalized to `tr[λ_j λ_k] = 2 δ_jk`.
pub fn gell_mann<T: Real>(j: usize) -> Result<HermitianOperator<T>> {
    let one = T::one();
    let zero = T::zero();
    let mut m = Mat::<C<T>>::zeros(3, 3);
    let mut sym = |a: usize, b: usize| {
        m[(a, b)] = re(one);
        m[(b, a)] = re(one);
    };
    match j {
        1 => sym(0, 1),
        4 => sym(0, 2),
        6 => sym(1, 2),
        2 | 5 | 7 => {
            let (a, b) = match j {
                2 => (0, 1),
                5 => (0, 2),
                _ => (1, 2),
            };
            m[(a, b)] = c(zero, -one);
            m[(b, a)] = c(zero, one);
        }
        3 => {
            m[(0, 0)] = re(one);
            m[(1, 1)] = re(-one);
        }
        8 => {
            let s = one / T::lit(3.0).sqrt();
            m[(0, 0)] = re(s);
            m[(1, 1)] = re(s);
            m[(2, 2)] = re(-T::lit(2.0) * s);
        }
        _ => return Err(Error::InvalidParameter(format!("Gell-Mann index {j} not in 1..=8"))),
    }
    Ok(HermitianOperator::symmetrized(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn axis_strategy() -> impl Strategy<Value = Axis> {
        prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
    }

    #[test]
    fn single_site_and_embedding() {
        let z1 = pauli_string::<f64>(1, &[(1, Axis::Z)]).unwrap();
        assert!(z1.distance(&HermitianOperator::from_real_diagonal(&[1.0, -1.0])).unwrap() == 0.0);
        let z_i = pauli_string::<f64>(2, &[(1, Axis::Z)]).unwrap();
        assert!(z_i.distance(&HermitianOperator::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0])).unwrap() == 0.0);
        let zz = pauli_string::<f64>(2, &[(1, Axis::Z), (2, Axis::Z)]).unwrap();
        assert!(zz.distance(&HermitianOperator::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0])).unwrap() == 0.0);
    }

    #[test]
    fn sigma_y_entries() {
        let y = pauli_string::<f64>(1, &[(1, Axis::Y)]).unwrap();
        assert_eq!(y.entry(0, 1), c(0.0, -1.0));
        assert_eq!(y.entry(1, 0), c(0.0, 1.0));
    }

    #[test]
    fn site_errors() {
        assert!(pauli_string::<f64>(2, &[(3, Axis::Z)]).is_err());
        assert!(pauli_string::<f64>(2, &[(0, Axis::Z)]).is_err());
        assert!(pauli_string::<f64>(2, &[(1, Axis::Z), (1, Axis::X)]).is_err());
    }

    #[test]
    fn labels() {
        let p = PauliString::new(4, &[(3, Axis::Y), (2, Axis::Z)]).unwrap();
        assert_eq!(p.label(), "zy@2,3");
        assert_eq!(PauliString::new(2, &[]).unwrap().label(), "id");
    }

    #[test]
    fn gell_mann_basics() {
        let l3 = gell_mann::<f64>(3).unwrap();
        assert!(l3.distance(&HermitianOperator::from_real_diagonal(&[1.0, -1.0, 0.0])).unwrap() == 0.0);
        let l8 = gell_mann::<f64>(8).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!(l8.distance(&HermitianOperator::from_real_diagonal(&[s, s, -2.0 * s])).unwrap() < 1e-15);
        assert_eq!(l3.trace_product(&l8).unwrap(), 0.0);
        for j in 1..=8 {
            for k in 1..=8 {
                let a = gell_mann::<f64>(j).unwrap();
                let b = gell_mann::<f64>(k).unwrap();
                let expected = if j == k { 2.0 } else { 0.0 };
                assert!((a.trace_product(&b).unwrap() - expected).abs() < 1e-14, "({j},{k})");
                assert!(a.trace().abs() < 1e-15);
            }
        }
        assert!(gell_mann::<f64>(0).is_err());
        assert!(gell_mann::<f64>(9).is_err());
    }

    proptest! {
        #[test]
        fn pauli_squares_to_identity(sites in 1usize..5, site in 1usize..5, axis in axis_strategy()) {
            prop_assume!(site <= sites);
            let p = pauli_string::<f64>(sites, &[(site, axis)]).unwrap();
            let sq = HermitianOperator::symmetrized(p.product(&p).unwrap());
            prop_assert!(sq.distance(&HermitianOperator::identity(1 << sites)).unwrap() < 1e-15);
            prop_assert!(p.trace().abs() < 1e-15);
        }

        #[test]
        fn distinct_axes_anticommute(sites in 1usize..5, site in 1usize..5, a in axis_strategy(), b in axis_strategy()) {
            prop_assume!(site <= sites && a != b);
            let p = pauli_string::<f64>(sites, &[(site, a)]).unwrap();
            let q = pauli_string::<f64>(sites, &[(site, b)]).unwrap();
            prop_assert!(p.half_anticommutator(&q).unwrap().frobenius_norm() < 1e-15);
        }

        #[test]
        fn structured_apply_matches_dense(
            sites in 1usize..5,
            raw in proptest::collection::vec((1usize..5, axis_strategy()), 0..4),
            seed in 0u64..1000,
        ) {
            let mut seen = std::collections::BTreeSet::new();
            let factors: Vec<_> = raw.into_iter().filter(|(s, _)| *s <= sites && seen.insert(*s)).collect();
            let p = PauliString::new(sites, &factors).unwrap();
            let dense: HermitianOperator<f64> = p.to_operator().unwrap();
            let d = 1 << sites;
            let mut x = seed;
            let mut next = || { x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5 };
            let v = Mat::from_fn(d, 3, |_, _| c(next(), next()));
            let fast = Observable::<f64>::apply(&p, v.as_ref()).unwrap();
            let slow = dense.apply(v.as_ref()).unwrap();
            prop_assert!(crate::linalg::frobenius_diff(fast.as_ref(), slow.as_ref()) < 1e-14);
            let (fast, _) = Observable::<f64>::column_inner(&p, v.as_ref()).unwrap();
            let (slow, _) = Observable::<f64>::column_inner(&dense, v.as_ref()).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-14);
            }
        }
    }
}
