//! The symmetric group `S_N`: elements, cycle types, conjugacy classes, and
//! the fermionic realization of a permutation on a particle-number sector.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fock::{apply_creation, FockBasis, OccupationState, SectorBasis};
use crate::limits::Limits;
use crate::operator::SectorOperator;
use crate::scalar::Scalar;

/// A bijection on `{1..N}`, stored in one-line notation (0-based internally).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    /// From 1-based one-line notation: `images[i-1] = σ(i)`.
    pub fn from_one_line(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        let mut zero_based = Vec::with_capacity(n);
        for &img in images {
            if img == 0 || img > n || seen[img - 1] {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection on 1..={n}")));
            }
            seen[img - 1] = true;
            zero_based.push(img - 1);
        }
        Ok(Permutation { images: zero_based })
    }

    /// The transposition `(i j)` in `S_n`.
    pub fn transposition(i: usize, j: usize, n: usize) -> Result<Self> {
        for s in [i, j] {
            if s == 0 || s > n {
                return Err(Error::SiteOutOfRange { site: s, n_sites: n });
            }
        }
        if i == j {
            return Err(Error::InvalidPermutation(format!("({i} {j}) is not a transposition")));
        }
        let mut p = Self::identity(n);
        p.images.swap(i - 1, j - 1);
        Ok(p)
    }

    /// Builds a permutation of `{1..n}` from disjoint 1-based cycles.
    pub fn from_cycles(cycles: &[Vec<usize>], n: usize) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for &s in cycle {
                if s == 0 || s > n {
                    return Err(Error::SiteOutOfRange { site: s, n_sites: n });
                }
                if touched[s - 1] {
                    return Err(Error::InvalidPermutation(format!("site {s} appears in two cycles")));
                }
                touched[s - 1] = true;
            }
            for (pos, &s) in cycle.iter().enumerate() {
                images[s - 1] = cycle[(pos + 1) % cycle.len()] - 1;
            }
        }
        Ok(Permutation { images })
    }

    /// Parses cycle notation such as `(1 2)(3 4 5)`; `()` is the identity.
    pub fn parse_cycles(text: &str, n: usize) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in {text:?}")))?;
            let close = open
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed cycle in {text:?}")))?;
            let cycle = open[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
            rest = open[close + 1..].trim_start();
        }
        Self::from_cycles(&cycles, n)
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// `σ(site)` for a 1-based site.
    pub fn apply(&self, site: usize) -> usize {
        self.images[site - 1] + 1
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|&i| i + 1).collect()
    }

    pub fn fixes(&self, site: usize) -> bool {
        self.apply(site) == site
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `self ∘ other`, i.e. `other` acts first.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch { expected: self.n(), found: other.n() });
        }
        Ok(Permutation { images: other.images.iter().map(|&i| self.images[i]).collect() })
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.n()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v] = i;
        }
        Permutation { images }
    }

    /// All cycles including fixed points, each starting at its smallest site.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for start in 0..self.n() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_type(&self) -> CycleType {
        CycleType::from_parts(self.cycles().iter().map(Vec::len).collect())
            .expect("cycle lengths of a permutation form a partition")
    }

    /// Image of a basis ket under the sector realization of `self`, with its sign.
    pub fn act_on(&self, state: OccupationState) -> (i8, OccupationState) {
        // a†_{σ(i1)} … a†_{σ(ik)} |Ω⟩, applied right to left
        let mut out = OccupationState::vacuum(state.n_sites()).expect("valid site count");
        let mut sign = 1i8;
        for site in state.sites().into_iter().rev() {
            let (s, next) = apply_creation(out, self.apply(site))
                .expect("image site in range")
                .expect("images of distinct sites are distinct");
            sign *= s;
            out = next;
        }
        (sign, out)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nontrivial: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if nontrivial.is_empty() {
            return write!(f, "()");
        }
        for c in nontrivial {
            let parts: Vec<String> = c.iter().map(usize::to_string).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

/// Partition of `N` giving the cycle structure shared by a conjugacy class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleType {
    parts: Vec<usize>,
}

impl CycleType {
    pub fn from_parts(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidCycleType(format!("{parts:?} is not a partition")));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(CycleType { parts })
    }

    /// One `p`-cycle and `n - p` fixed points.
    pub fn p_cycle(p: usize, n: usize) -> Result<Self> {
        if p == 0 || p > n {
            return Err(Error::InvalidCycleType(format!("no {p}-cycles in S_{n}")));
        }
        let mut parts = vec![p];
        parts.extend(std::iter::repeat_n(1, n - p));
        Self::from_parts(parts)
    }

    /// Partition from non-trivial cycle lengths, padded with fixed points up to `n`.
    pub fn padded(lengths: &[usize], n: usize) -> Result<Self> {
        let used: usize = lengths.iter().sum();
        if used > n {
            return Err(Error::InvalidCycleType(format!("{lengths:?} needs more than {n} sites")));
        }
        let mut parts = lengths.to_vec();
        parts.extend(std::iter::repeat_n(1, n - used));
        Self::from_parts(parts)
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Cycle lengths, descending, fixed points included.
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// `ν_L`, the number of cycles of length `len`.
    pub fn multiplicity(&self, len: usize) -> usize {
        self.parts.iter().filter(|&&p| p == len).count()
    }

    /// `N! / Π_L (L^{ν_L} ν_L!)`, saturating at `u128::MAX`.
    pub fn class_size(&self) -> u128 {
        let n = self.n();
        let mut size: u128 = 1;
        let mut overflow = false;
        for i in 2..=n as u128 {
            match size.checked_mul(i) {
                Some(v) => size = v,
                None => overflow = true,
            }
        }
        if overflow {
            return u128::MAX;
        }
        for len in 1..=n {
            let nu = self.multiplicity(len);
            for m in 1..=nu {
                size /= len as u128;
                size /= m as u128;
            }
        }
        size
    }
}

impl FromStr for CycleType {
    type Err = Error;

    /// Comma, plus or whitespace separated cycle lengths, e.g. `3,2` or `2+1+1`.
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(|c: char| c == ',' || c == '+' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(parts)
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(usize::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Streams the elements of one conjugacy class in lexicographic order of
/// their one-line notation.
///
/// Images are assigned position by position; a partial assignment is kept
/// only if its closed cycles fit the target cycle type and its open chains
/// can still be joined into the remaining cycles.
pub struct ClassIter {
    n: usize,
    target: Vec<u8>,
    images: Vec<usize>,
    used: Vec<bool>,
    next_try: Vec<usize>,
    depth: usize,
    done: bool,
    memo: HashMap<(Vec<u8>, Vec<u8>), bool>,
}

/// Iterator over the conjugacy class with cycle type `ct`, under the
/// process-wide class-size cap.
pub fn conjugacy_class(ct: &CycleType) -> Result<ClassIter> {
    conjugacy_class_with_limits(ct, &Limits::current())
}

pub fn conjugacy_class_with_limits(ct: &CycleType, limits: &Limits) -> Result<ClassIter> {
    let size = ct.class_size();
    if size > limits.max_class_size {
        return Err(Error::ClassTooLarge { size, cap: limits.max_class_size });
    }
    let n = ct.n();
    let mut target = vec![0u8; n + 1];
    for &p in ct.parts() {
        target[p] += 1;
    }
    Ok(ClassIter {
        n,
        target,
        images: vec![0; n],
        used: vec![false; n],
        next_try: vec![0; n + 1],
        depth: 0,
        done: false,
        memo: HashMap::new(),
    })
}

impl ClassIter {
    // positions 0..assigned have images
    fn feasible(&mut self, assigned: usize) -> bool {
        let n = self.n;
        let mut remaining = self.target.clone();
        let mut visited = vec![false; n];
        let mut chains: Vec<u8> = Vec::new();
        for start in 0..n {
            if self.used[start] {
                continue;
            }
            // no preimage yet: walk the open chain
            let mut len = 0u8;
            let mut x = start;
            loop {
                visited[x] = true;
                len += 1;
                if x >= assigned {
                    break;
                }
                x = self.images[x];
            }
            chains.push(len);
        }
        for start in 0..assigned {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !visited[x] {
                visited[x] = true;
                len += 1;
                x = self.images[x];
            }
            if remaining[len] == 0 {
                return false;
            }
            remaining[len] -= 1;
        }
        chains.sort_unstable_by(|a, b| b.cmp(a));
        let key = (chains, remaining);
        if let Some(&ok) = self.memo.get(&key) {
            return ok;
        }
        let mut bins: Vec<usize> = Vec::new();
        for (len, &count) in key.1.iter().enumerate() {
            bins.extend(std::iter::repeat_n(len, count as usize));
        }
        let ok = pack(&key.0, &mut bins);
        self.memo.insert(key, ok);
        ok
    }
}

// Can every chain be placed into a bin so that each bin is filled exactly?
// Chain and bin totals are always equal, so placing every chain suffices.
fn pack(chains: &[u8], bins: &mut [usize]) -> bool {
    let Some((&first, rest)) = chains.split_first() else {
        return true;
    };
    let first = first as usize;
    let mut tried: Vec<usize> = Vec::new();
    for b in 0..bins.len() {
        let cap = bins[b];
        if cap < first || tried.contains(&cap) {
            continue;
        }
        tried.push(cap);
        bins[b] -= first;
        let ok = pack(rest, bins);
        bins[b] += first;
        if ok {
            return true;
        }
    }
    false
}

impl Iterator for ClassIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        loop {
            if self.done {
                return None;
            }
            if self.depth == self.n {
                // last call yielded a full assignment
                self.depth -= 1;
                self.used[self.images[self.depth]] = false;
                continue;
            }
            let d = self.depth;
            let mut found = false;
            let mut c = self.next_try[d];
            while c < self.n {
                if !self.used[c] {
                    self.images[d] = c;
                    self.used[c] = true;
                    if self.feasible(d + 1) {
                        found = true;
                        break;
                    }
                    self.used[c] = false;
                }
                c += 1;
            }
            if !found {
                if d == 0 {
                    self.done = true;
                    return None;
                }
                self.depth -= 1;
                self.used[self.images[self.depth]] = false;
                continue;
            }
            self.next_try[d] = c + 1;
            self.depth += 1;
            self.next_try[self.depth] = 0;
            if self.depth == self.n {
                return Some(Permutation { images: self.images.clone() });
            }
        }
    }
}

/// Signed permutation matrix of `σ` on one sector:
/// `Σ_{i1<…<ik} a†_{σ(i1)} … a†_{σ(ik)} a_{ik} … a_{i1}`.
pub fn realize_on<T: Scalar>(sigma: &Permutation, basis: &SectorBasis) -> Result<SectorOperator<T>> {
    if sigma.n() != basis.n_sites() {
        return Err(Error::SizeMismatch { expected: basis.n_sites(), found: sigma.n() });
    }
    let triplets = basis.iter().enumerate().map(|(col, state)| {
        let (sign, image) = sigma.act_on(state);
        let row = basis.index_of_bits(image.bits()).expect("permutation preserves particle number");
        (row, col, T::from_int(sign as i64))
    });
    Ok(SectorOperator::from_triplets(basis.dim(), basis.dim(), triplets.collect::<Vec<_>>()))
}

/// Realization of `σ` on the `k`-fermion sector of `σ.n()` sites.
pub fn realize_permutation<T: Scalar>(sigma: &Permutation, k: usize) -> Result<SectorOperator<T>> {
    let basis = SectorBasis::new(sigma.n(), k)?;
    realize_on(sigma, &basis)
}

/// Direct sum of the sector realizations over `k = 0..=N`.
pub fn realize_full<T: Scalar>(sigma: &Permutation) -> Result<SectorOperator<T>> {
    let fock = FockBasis::new(sigma.n())?;
    let blocks = (0..=sigma.n())
        .map(|k| realize_on(sigma, fock.sector(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SectorOperator::block_diagonal(&blocks))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(i: usize, n: usize) -> Permutation {
        Permutation::transposition(i, i + 1, n).unwrap()
    }

    #[test]
    fn group_relations() {
        let (s1, s2) = (s(1, 3), s(2, 3));
        assert!(s1.compose(&s1).unwrap().is_identity());
        let lhs = s1.compose(&s2.compose(&s1).unwrap()).unwrap();
        let rhs = s2.compose(&s1.compose(&s2).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        let p = Permutation::from_one_line(&[2, 3, 1]).unwrap();
        assert!(p.compose(&p.inverse()).unwrap().is_identity());
        assert!(s1.compose(&Permutation::identity(4)).is_err());
    }

    #[test]
    fn compose_order() {
        // (1 2) ∘ (2 3): 3 -> 2 -> 1
        let p = s(1, 3).compose(&s(2, 3)).unwrap();
        assert_eq!(p.apply(3), 1);
        assert_eq!(p.one_line(), vec![2, 3, 1]);
    }

    #[test]
    fn cycle_types() {
        let p = Permutation::parse_cycles("(1 2 3)(4 5)", 5).unwrap();
        assert_eq!(p.cycle_type().parts(), &[3, 2]);
        assert_eq!(p.to_string(), "(1 2 3)(4 5)");
        assert_eq!(Permutation::parse_cycles("()", 3).unwrap(), Permutation::identity(3));
        assert_eq!(Permutation::identity(3).to_string(), "()");
        assert!(Permutation::parse_cycles("(1 2)(2 3)", 3).is_err());
        assert!(Permutation::parse_cycles("(1 4)", 3).is_err());
        assert!(Permutation::parse_cycles("(1 2", 3).is_err());
        assert!(Permutation::from_one_line(&[1, 1, 2]).is_err());
        assert_eq!("3,1,1".parse::<CycleType>().unwrap(), CycleType::p_cycle(3, 5).unwrap());
        assert!("2,0".parse::<CycleType>().is_err());
    }

    #[test]
    fn class_sizes() {
        assert_eq!(CycleType::p_cycle(2, 4).unwrap().class_size(), 6);
        assert_eq!(CycleType::p_cycle(3, 4).unwrap().class_size(), 8);
        assert_eq!(CycleType::from_parts(vec![1, 1, 1]).unwrap().class_size(), 1);
        assert_eq!(CycleType::from_parts(vec![2, 2]).unwrap().class_size(), 3);
        assert_eq!(CycleType::p_cycle(2, 20).unwrap().class_size(), 190);
    }

    #[test]
    fn class_enumeration_counts() {
        let cases: [(&[usize], usize); 3] = [(&[2, 1, 1], 6), (&[3, 1], 8), (&[1, 1, 1], 1)];
        for (parts, expected) in cases {
            let ct = CycleType::from_parts(parts.to_vec()).unwrap();
            let elems: Vec<_> = conjugacy_class(&ct).unwrap().collect();
            assert_eq!(elems.len(), expected, "{ct}");
            assert!(elems.iter().all(|p| p.cycle_type() == ct));
            assert!(elems.windows(2).all(|w| w[0].one_line() < w[1].one_line()));
        }
    }

    #[test]
    fn class_enumeration_matches_brute_force() {
        // every permutation of S_6 lands in exactly one class
        let n = 6;
        let mut all: Vec<Vec<usize>> = Vec::new();
        permute(&mut (1..=n).collect(), 0, &mut all);
        all.sort();
        let mut by_type: HashMap<Vec<usize>, Vec<Vec<usize>>> = HashMap::new();
        for p in &all {
            let perm = Permutation::from_one_line(p).unwrap();
            by_type.entry(perm.cycle_type().parts().to_vec()).or_default().push(p.clone());
        }
        assert_eq!(by_type.len(), 11);
        for (parts, expected) in by_type {
            let ct = CycleType::from_parts(parts).unwrap();
            let got: Vec<Vec<usize>> = conjugacy_class(&ct).unwrap().map(|p| p.one_line()).collect();
            assert_eq!(got.len() as u128, ct.class_size());
            assert_eq!(got, expected, "{ct}");
        }
    }

    fn permute(v: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
        if start == v.len() {
            out.push(v.clone());
            return;
        }
        for i in start..v.len() {
            v.swap(start, i);
            permute(v, start + 1, out);
            v.swap(start, i);
        }
    }

    #[test]
    fn class_cap() {
        let ct = CycleType::p_cycle(2, 6).unwrap();
        let tight = Limits { max_class_size: 10, ..Limits::default() };
        assert!(matches!(
            conjugacy_class_with_limits(&ct, &tight),
            Err(Error::ClassTooLarge { size: 15, cap: 10 })
        ));
    }

    #[test]
    fn realization_examples() {
        let id = Permutation::identity(4);
        for k in 0..=4 {
            let m = realize_permutation::<i64>(&id, k).unwrap();
            assert_eq!(m, SectorOperator::identity(m.rows()));
        }
        let swap = Permutation::transposition(1, 2, 2).unwrap();
        let m = realize_permutation::<i64>(&swap, 1).unwrap();
        assert_eq!(m.to_dense_rows(), vec![vec![0, 1], vec![1, 0]]);
        // both fermions exchanged: a†_2 a†_1 |Ω⟩ = -|1,2⟩
        let m = realize_permutation::<i64>(&swap, 2).unwrap();
        assert_eq!(m.to_dense_rows(), vec![vec![-1]]);
    }

    #[test]
    fn full_space_is_block_diagonal() {
        let sigma = Permutation::parse_cycles("(1 3)", 3).unwrap();
        let full = realize_full::<i64>(&sigma).unwrap();
        assert_eq!(full.rows(), 8);
        let fock = FockBasis::new(3).unwrap();
        for (i, j, _) in full.entries() {
            let (a, b) = (fock.iter().nth(i).unwrap(), fock.iter().nth(j).unwrap());
            assert_eq!(a.n_particles(), b.n_particles());
        }
        assert_eq!(full.get(0, 0), 1);
    }
}
