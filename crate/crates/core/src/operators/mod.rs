//! Weighted sums of spin-operator products and the closed-form effective
//! Hamiltonians of the two-frequency drive.
//!
//! A factor `(j, a)` stands for the spin-1/2 operator `I_ja = σ_ja / 2`.

mod hamiltonians;
mod rotation;

use std::cmp::Ordering;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{parse_err, Error, Result};

pub use hamiltonians::{
    boundary_phase, leading_effective_hamiltonian, lattice_sum_factors, replica_floquet_hamiltonian,
    small_n_two_cycle_hamiltonian, system_hamiltonian, toggling_effective_hamiltonian,
    toggling_effective_hamiltonian_with, SMALL_N_FAST_PULSES,
};
pub use rotation::{composite_rotation, Quaternion, RotationSpec, SlowAxis};

/// Coefficients with magnitude below this are dropped after merging.
pub const MERGE_TOLERANCE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }
}

pub type Factor = (usize, Axis);

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    /// Sites strictly ascending.
    pub factors: Vec<Factor>,
}

/// Real-weighted sum of spin-operator products on `sites` spins, kept in
/// canonical order so that equal operators compare equal structurally.
#[derive(Clone, Debug, PartialEq)]
pub struct TermOperator {
    sites: usize,
    terms: Vec<Term>,
}

fn cmp_factors(a: &[Factor], b: &[Factor]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl TermOperator {
    pub fn zero(sites: usize) -> Self {
        Self { sites, terms: Vec::new() }
    }

    /// Canonicalizes arbitrary `(coeff, factors)` input: sorts factors by
    /// site, rejects repeated sites, merges equal products and drops
    /// vanishing coefficients.
    pub fn from_terms<I>(sites: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Vec<Factor>)>,
    {
        let mut raw = Vec::new();
        for (coeff, mut factors) in terms {
            if !coeff.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite coefficient {coeff}")));
            }
            factors.sort_by_key(|f| f.0);
            for w in factors.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::InvalidParameter(format!("site {} repeated within a term", w[0].0)));
                }
            }
            if let Some(&(site, _)) = factors.iter().find(|f| f.0 >= sites) {
                return Err(Error::InvalidParameter(format!("site {site} out of range for L = {sites}")));
            }
            raw.push(Term { coeff, factors });
        }
        raw.sort_by(|a, b| cmp_factors(&a.factors, &b.factors));
        let mut terms: Vec<Term> = Vec::with_capacity(raw.len());
        for t in raw {
            match terms.last_mut() {
                Some(last) if last.factors == t.factors => last.coeff += t.coeff,
                _ => terms.push(t),
            }
        }
        terms.retain(|t| t.coeff.abs() >= MERGE_TOLERANCE);
        Ok(Self { sites, terms })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let terms = self.terms.iter().map(|t| (t.coeff * s, t.factors.clone()));
        Self::from_terms(self.sites, terms).expect("scaling keeps terms canonical")
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.sites != other.sites {
            return Err(Error::SiteMismatch { expected: self.sites, found: other.sites });
        }
        let terms = self.terms.iter().chain(&other.terms).map(|t| (t.coeff, t.factors.clone()));
        Self::from_terms(self.sites, terms)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.scaled(-1.0))
    }

    /// Largest coefficient magnitude of `self − other`.
    pub fn max_coeff_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.minus(other)?.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max))
    }

    /// Coefficient of the product `factors` (sites ascending), zero if absent.
    pub fn coeff_of(&self, factors: &[Factor]) -> f64 {
        self.terms
            .binary_search_by(|t| cmp_factors(&t.factors, factors))
            .map(|i| self.terms[i].coeff)
            .unwrap_or(0.0)
    }

    /// Collective spin component `𝓘_a = Σ_j I_ja`.
    pub fn collective(sites: usize, axis: Axis) -> Self {
        Self::from_terms(sites, (0..sites).map(|j| (1.0, vec![(j, axis)]))).expect("valid sites")
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{TERM_HEADER}")?;
        writeln!(w, "sites {}", self.sites)?;
        for t in &self.terms {
            write!(w, "{:e}", t.coeff)?;
            for (site, axis) in &t.factors {
                write!(w, " {site}:{}", axis.as_char())?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next = || -> Result<Option<(usize, String)>> {
            match lines.next() {
                Some((i, line)) => Ok(Some((i + 1, line?))),
                None => Ok(None),
            }
        };
        match next()? {
            Some((_, h)) if h.trim() == TERM_HEADER => {}
            _ => return Err(parse_err(1, "missing term-operator header")),
        }
        let sites = match next()? {
            Some((n, line)) => line
                .trim()
                .strip_prefix("sites ")
                .and_then(|s| s.trim().parse::<usize>().ok())
                .ok_or_else(|| parse_err(n, "expected `sites L`"))?,
            None => return Err(parse_err(2, "expected `sites L`")),
        };
        let mut terms = Vec::new();
        while let Some((n, line)) = next()? {
            let mut tokens = line.split_whitespace();
            let Some(first) = tokens.next() else { continue };
            let coeff: f64 = first.parse().map_err(|_| parse_err(n, format!("bad coefficient `{first}`")))?;
            let mut factors = Vec::new();
            for tok in tokens {
                let (site, axis) = tok.split_once(':').ok_or_else(|| parse_err(n, format!("bad factor `{tok}`")))?;
                let site: usize = site.parse().map_err(|_| parse_err(n, format!("bad site `{site}`")))?;
                let mut chars = axis.chars();
                let axis = match (chars.next().and_then(Axis::from_char), chars.next()) {
                    (Some(a), None) => a,
                    _ => return Err(parse_err(n, format!("bad axis `{axis}`"))),
                };
                factors.push((site, axis));
            }
            terms.push((coeff, factors));
        }
        let op = Self::from_terms(sites, terms)?;
        Ok(op)
    }
}

const TERM_HEADER: &str = "# pdtc term-operator v1";

impl fmt::Display for TermOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        self.write_text(&mut buf).map_err(|_| fmt::Error)?;
        f.write_str(&String::from_utf8_lossy(&buf))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_order_merges_and_sorts() {
        let a = TermOperator::from_terms(
            3,
            vec![
                (1.0, vec![(2, Axis::Z), (0, Axis::X)]),
                (0.5, vec![(1, Axis::Y)]),
                (2.0, vec![(0, Axis::X), (2, Axis::Z)]),
            ],
        )
        .unwrap();
        assert_eq!(a.terms().len(), 2);
        assert_eq!(a.terms()[0].factors, vec![(1, Axis::Y)]);
        assert_eq!(a.coeff_of(&[(0, Axis::X), (2, Axis::Z)]), 3.0);
    }

    #[test]
    fn cancelling_terms_vanish() {
        let a = TermOperator::collective(4, Axis::X);
        assert!(a.minus(&a).unwrap().is_zero());
    }

    #[test]
    fn invalid_terms_rejected() {
        assert!(TermOperator::from_terms(2, vec![(1.0, vec![(0, Axis::X), (0, Axis::Y)])]).is_err());
        assert!(TermOperator::from_terms(2, vec![(1.0, vec![(2, Axis::X)])]).is_err());
        assert!(TermOperator::from_terms(2, vec![(f64::NAN, vec![(0, Axis::X)])]).is_err());
    }

    #[test]
    fn text_format_is_readable() {
        let op = TermOperator::from_terms(2, vec![(0.25, vec![(0, Axis::Z), (1, Axis::Z)])]).unwrap();
        let text = op.to_string();
        assert_eq!(text, "# pdtc term-operator v1\nsites 2\n2.5e-1 0:z 1:z\n");
    }

    fn arb_operator() -> impl Strategy<Value = TermOperator> {
        let axis = prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)];
        let term = (-10.0f64..10.0, proptest::collection::btree_map(0usize..5, axis, 0..4));
        proptest::collection::vec(term, 0..12).prop_map(|ts| {
            TermOperator::from_terms(5, ts.into_iter().map(|(c, f)| (c, f.into_iter().collect()))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn text_roundtrip_exact(op in arb_operator()) {
            let mut buf = Vec::new();
            op.write_text(&mut buf).unwrap();
            let back = TermOperator::read_text(buf.as_slice()).unwrap();
            prop_assert_eq!(back, op);
        }

        #[test]
        fn addition_commutes(a in arb_operator(), b in arb_operator()) {
            prop_assert!(a.plus(&b).unwrap().max_coeff_distance(&b.plus(&a).unwrap()).unwrap() < 1e-14);
        }
    }
}
