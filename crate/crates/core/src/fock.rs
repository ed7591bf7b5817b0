//! Antisymmetric Fock space: occupation patterns, particle-number sectors and
//! the fermionic ladder operators acting on them.
//!
//! Basis kets are `a†_{i1} … a†_{ik} |Ω⟩` with `i1 < … < ik`, stored as a bit
//! pattern where bit `i - 1` marks site `i`. Applying `a†_s` or `a_s` to such
//! a ket picks up `(-1)^m`, with `m` the number of occupied sites below `s`.
//! Sites are 1-based in every public signature.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::limits::{binomial, Limits};
use crate::operator::SectorOperator;
use crate::scalar::{Real, Scalar};

/// Which sites of an `N`-site lattice carry a fermion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState {
    bits: u64,
    n_sites: usize,
}

impl OccupationState {
    pub fn new(bits: u64, n_sites: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > 63 {
            return Err(Error::InvalidArgument(format!("unsupported site count {n_sites}")));
        }
        if bits >> n_sites != 0 {
            return Err(Error::InvalidArgument(format!(
                "bit pattern {bits:#b} does not fit in {n_sites} sites"
            )));
        }
        Ok(OccupationState { bits, n_sites })
    }

    pub fn vacuum(n_sites: usize) -> Result<Self> {
        Self::new(0, n_sites)
    }

    /// Ket with the given 1-based sites occupied. Sites must be distinct.
    pub fn from_sites(sites: &[usize], n_sites: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &s in sites {
            check_site(s, n_sites)?;
            let mask = 1u64 << (s - 1);
            if bits & mask != 0 {
                return Err(Error::InvalidArgument(format!("site {s} listed twice")));
            }
            bits |= mask;
        }
        Self::new(bits, n_sites)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_particles(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_occupied(&self, site: usize) -> bool {
        site >= 1 && site <= self.n_sites && self.bits & (1 << (site - 1)) != 0
    }

    /// Occupied sites in ascending order, 1-based.
    pub fn sites(&self) -> Vec<usize> {
        (1..=self.n_sites).filter(|&s| self.is_occupied(s)).collect()
    }

    /// Number of occupied sites shared with `other`.
    pub fn overlap(&self, other: &OccupationState) -> usize {
        (self.bits & other.bits).count_ones() as usize
    }

    /// Comma-free label such as `1|2`; the vacuum is `vac`.
    pub fn label(&self) -> String {
        if self.bits == 0 {
            return "vac".to_string();
        }
        let parts: Vec<String> = self.sites().iter().map(usize::to_string).collect();
        parts.join("|")
    }

    pub fn parse_label(label: &str, n_sites: usize) -> Result<Self> {
        let label = label.trim();
        if label == "vac" {
            return Self::vacuum(n_sites);
        }
        let sites = label
            .split('|')
            .map(|s| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("{label:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_sites(&sites, n_sites)
    }
}

/// Bit pattern with site 1 as the rightmost character, e.g. `001` for `a†_1|Ω⟩`.
impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.n_sites)
    }
}

fn check_site(site: usize, n_sites: usize) -> Result<()> {
    if site == 0 || site > n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    Ok(())
}

#[inline]
fn parity_below(bits: u64, site0: usize) -> i8 {
    let below = bits & ((1u64 << site0) - 1);
    if below.count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `a†_site` on a basis ket: `None` if the site is already occupied.
pub fn apply_creation(state: OccupationState, site: usize) -> Result<Option<(i8, OccupationState)>> {
    check_site(site, state.n_sites)?;
    let mask = 1u64 << (site - 1);
    if state.bits & mask != 0 {
        return Ok(None);
    }
    let sign = parity_below(state.bits, site - 1);
    Ok(Some((sign, OccupationState { bits: state.bits | mask, n_sites: state.n_sites })))
}

/// `a_site` on a basis ket: `None` if the site is empty.
pub fn apply_annihilation(state: OccupationState, site: usize) -> Result<Option<(i8, OccupationState)>> {
    check_site(site, state.n_sites)?;
    let mask = 1u64 << (site - 1);
    if state.bits & mask == 0 {
        return Ok(None);
    }
    let sign = parity_below(state.bits, site - 1);
    Ok(Some((sign, OccupationState { bits: state.bits & !mask, n_sites: state.n_sites })))
}

/// Ordered enumeration of all `k`-fermion kets on `N` sites.
///
/// States are sorted by bit-pattern value. Ranks come from the combinatorial
/// number system, so no lookup table is stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    n_sites: usize,
    n_particles: usize,
    states: Vec<u64>,
}

impl SectorBasis {
    /// Enumerates the sector under the process-wide [`Limits`].
    pub fn new(n_sites: usize, n_particles: usize) -> Result<Self> {
        Self::with_limits(n_sites, n_particles, &Limits::current())
    }

    pub fn with_limits(n_sites: usize, n_particles: usize, limits: &Limits) -> Result<Self> {
        limits.check_sites(n_sites)?;
        if n_particles > n_sites {
            return Err(Error::SectorOutOfRange { k: n_particles, n_sites });
        }
        let dim = binomial(n_sites, n_particles);
        limits.check_dim(dim)?;
        let mut states = Vec::with_capacity(dim as usize);
        if n_particles == 0 {
            states.push(0);
        } else {
            // Gosper's hack: next larger integer with the same popcount
            let limit = 1u64 << n_sites;
            let mut v = (1u64 << n_particles) - 1;
            while v < limit {
                states.push(v);
                let c = v & v.wrapping_neg();
                let r = v + c;
                v = (((r ^ v) >> 2) / c) | r;
            }
        }
        debug_assert_eq!(states.len() as u128, dim);
        Ok(SectorBasis { n_sites, n_particles, states })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn bits(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, index: usize) -> OccupationState {
        OccupationState { bits: self.states[index], n_sites: self.n_sites }
    }

    pub fn iter(&self) -> impl Iterator<Item = OccupationState> + '_ {
        self.states.iter().map(|&bits| OccupationState { bits, n_sites: self.n_sites })
    }

    /// Position of a bit pattern in the basis, if it belongs to this sector.
    pub fn index_of_bits(&self, bits: u64) -> Option<usize> {
        if bits >> self.n_sites != 0 || bits.count_ones() as usize != self.n_particles {
            return None;
        }
        let mut rank: u128 = 0;
        let mut rest = bits;
        let mut j = 0;
        while rest != 0 {
            let pos = rest.trailing_zeros() as usize;
            j += 1;
            rank += binomial(pos, j);
            rest &= rest - 1;
        }
        Some(rank as usize)
    }

    pub fn rank(&self, state: &OccupationState) -> Option<usize> {
        if state.n_sites != self.n_sites {
            return None;
        }
        self.index_of_bits(state.bits)
    }

    /// Inverse of [`SectorBasis::rank`], computed without the stored table.
    pub fn unrank(&self, index: usize) -> Option<OccupationState> {
        if index >= self.dim() {
            return None;
        }
        let mut rest = index as u128;
        let mut bits = 0u64;
        let mut pos = self.n_sites;
        for j in (1..=self.n_particles).rev() {
            // largest position with C(pos, j) <= rest
            pos -= 1;
            while binomial(pos, j) > rest {
                pos -= 1;
            }
            rest -= binomial(pos, j);
            bits |= 1 << pos;
        }
        Some(OccupationState { bits, n_sites: self.n_sites })
    }

    pub fn labels(&self) -> Vec<String> {
        self.iter().map(|s| s.label()).collect()
    }
}

/// All sectors `k = 0..=N` concatenated in order of particle number, so that
/// number-conserving operators are block diagonal.
#[derive(Debug, Clone)]
pub struct FockBasis {
    sectors: Vec<SectorBasis>,
    offsets: Vec<usize>,
}

impl FockBasis {
    pub fn new(n_sites: usize) -> Result<Self> {
        let limits = Limits::current();
        if n_sites == 0 || n_sites > limits.max_fock_sites {
            return Err(Error::TooManySites { n_sites, max: limits.max_fock_sites });
        }
        limits.check_dim(1u128 << n_sites)?;
        let sectors = (0..=n_sites)
            .map(|k| SectorBasis::with_limits(n_sites, k, &limits))
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = Vec::with_capacity(sectors.len());
        let mut acc = 0;
        for s in &sectors {
            offsets.push(acc);
            acc += s.dim();
        }
        Ok(FockBasis { sectors, offsets })
    }

    pub fn n_sites(&self) -> usize {
        self.sectors[0].n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites()
    }

    pub fn sector(&self, k: usize) -> &SectorBasis {
        &self.sectors[k]
    }

    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    pub fn index_of_bits(&self, bits: u64) -> Option<usize> {
        let k = bits.count_ones() as usize;
        let sector = self.sectors.get(k)?;
        sector.index_of_bits(bits).map(|r| self.offsets[k] + r)
    }

    pub fn iter(&self) -> impl Iterator<Item = OccupationState> + '_ {
        self.sectors.iter().flat_map(|s| s.iter())
    }
}

type Ladder = fn(OccupationState, usize) -> Result<Option<(i8, OccupationState)>>;

fn ladder_between<T: Scalar>(
    from: &SectorBasis,
    to: &SectorBasis,
    site: usize,
    op: Ladder,
) -> Result<SectorOperator<T>> {
    let mut triplets = Vec::with_capacity(from.dim());
    for (col, state) in from.iter().enumerate() {
        if let Some((sign, image)) = op(state, site)? {
            let row = to.index_of_bits(image.bits).expect("ladder image in target sector");
            triplets.push((row, col, T::from_int(sign as i64)));
        }
    }
    Ok(SectorOperator::from_triplets(to.dim(), from.dim(), triplets))
}

/// `a†_site` as a map from the `k`-sector into the `(k+1)`-sector.
pub fn creation_matrix<T: Scalar>(from: &SectorBasis, site: usize) -> Result<SectorOperator<T>> {
    let to = SectorBasis::new(from.n_sites, from.n_particles + 1)?;
    ladder_between(from, &to, site, apply_creation)
}

/// `a_site` as a map from the `k`-sector into the `(k-1)`-sector.
pub fn annihilation_matrix<T: Scalar>(from: &SectorBasis, site: usize) -> Result<SectorOperator<T>> {
    if from.n_particles == 0 {
        return Err(Error::SectorOutOfRange { k: 0, n_sites: from.n_sites });
    }
    let to = SectorBasis::new(from.n_sites, from.n_particles - 1)?;
    ladder_between(from, &to, site, apply_annihilation)
}

fn fock_ladder<T: Scalar>(fock: &FockBasis, site: usize, op: Ladder) -> Result<SectorOperator<T>> {
    let mut triplets = Vec::new();
    for (col, state) in fock.iter().enumerate() {
        if let Some((sign, image)) = op(state, site)? {
            let row = fock.index_of_bits(image.bits).expect("image inside Fock space");
            triplets.push((row, col, T::from_int(sign as i64)));
        }
    }
    Ok(SectorOperator::from_triplets(fock.dim(), fock.dim(), triplets))
}

/// `a†_site` on the full `2^N`-dimensional Fock space.
pub fn fock_creation<T: Scalar>(fock: &FockBasis, site: usize) -> Result<SectorOperator<T>> {
    fock_ladder(fock, site, apply_creation)
}

/// `a_site` on the full `2^N`-dimensional Fock space.
pub fn fock_annihilation<T: Scalar>(fock: &FockBasis, site: usize) -> Result<SectorOperator<T>> {
    fock_ladder(fock, site, apply_annihilation)
}

/// Matrix of `a†_i a_j` restricted to one sector, fermionic signs included.
pub fn bilinear_matrix<T: Scalar>(basis: &SectorBasis, i: usize, j: usize) -> Result<SectorOperator<T>> {
    check_site(i, basis.n_sites)?;
    check_site(j, basis.n_sites)?;
    let mut triplets = Vec::with_capacity(basis.dim());
    for (col, state) in basis.iter().enumerate() {
        if let Some((s1, mid)) = apply_annihilation(state, j)? {
            if let Some((s2, image)) = apply_creation(mid, i)? {
                let row = basis.index_of_bits(image.bits).expect("bilinear stays in sector");
                triplets.push((row, col, T::from_int((s1 * s2) as i64)));
            }
        }
    }
    Ok(SectorOperator::from_triplets(basis.dim(), basis.dim(), triplets))
}

/// `N̂ = Σ a†_i a_i` on a sector, i.e. `k` times the identity.
pub fn number_operator<T: Scalar>(basis: &SectorBasis) -> SectorOperator<T> {
    SectorOperator::identity(basis.dim()).scale(T::from_int(basis.n_particles as i64))
}

/// Complex amplitudes over one sector basis.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveVector<R: Real> {
    basis: Arc<SectorBasis>,
    amps: Vec<Complex<R>>,
}

impl<R: Real> WaveVector<R> {
    pub fn new(basis: Arc<SectorBasis>, amps: Vec<Complex<R>>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::SizeMismatch { expected: basis.dim(), found: amps.len() });
        }
        Ok(WaveVector { basis, amps })
    }

    pub fn zeros(basis: Arc<SectorBasis>) -> Self {
        let amps = vec![Complex::zero(); basis.dim()];
        WaveVector { basis, amps }
    }

    /// The basis ket with the given 1-based sites occupied.
    pub fn basis_ket(basis: Arc<SectorBasis>, sites: &[usize]) -> Result<Self> {
        let state = OccupationState::from_sites(sites, basis.n_sites())?;
        let idx = basis.rank(&state).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{} sites given for a {}-fermion sector",
                sites.len(),
                basis.n_particles()
            ))
        })?;
        let mut v = Self::zeros(basis);
        v.amps[idx] = Complex::new(R::one(), R::zero());
        Ok(v)
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn n_particles(&self) -> usize {
        self.basis.n_particles()
    }

    pub fn amps(&self) -> &[Complex<R>] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [Complex<R>] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<Complex<R>> {
        self.amps
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex<R> {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn norm(&self) -> R {
        self.amps.iter().fold(R::zero(), |acc, a| acc + a.norm_sqr()).sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > R::zero() {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    pub fn probabilities(&self) -> Vec<R> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&self, op: &SectorOperator<R>) -> Result<Self> {
        if op.rows() != self.basis.dim() || op.cols() != self.basis.dim() {
            return Err(Error::SizeMismatch { expected: self.basis.dim(), found: op.cols() });
        }
        Ok(WaveVector { basis: Arc::clone(&self.basis), amps: op.apply(&self.amps) })
    }

    /// Norm of `H v - e v`.
    pub fn eigen_residual(&self, op: &SectorOperator<R>, eigenvalue: R) -> R {
        let hv = op.apply(&self.amps);
        hv.iter()
            .zip(&self.amps)
            .fold(R::zero(), |acc, (h, v)| acc + (*h - *v * eigenvalue).norm_sqr())
            .sqrt()
    }
}
