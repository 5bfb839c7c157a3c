//! Matrix-free action of a [`TermOperator`] on state vectors.
//!
//! With `Y = iXZ`, a Pauli product acts on basis states as
//! `P|s⟩ = i^{n_Y} (−1)^{popcount(s & zmask)} |s ⊕ xmask⟩`, so every term
//! is a (flip mask, phase mask, complex weight) triple. Terms sharing a flip
//! mask are fused into one pass; purely diagonal terms collapse into a
//! precomputed diagonal.

use num_complex::Complex64;

use crate::operators::{Axis, TermOperator};

/// Groups whose phase masks span more bits than this fall back to
/// evaluating each term per amplitude.
const TABLE_BITS: usize = 8;

#[derive(Clone, Debug)]
struct FlipGroup {
    flip: usize,
    /// Bit positions the phase depends on.
    phase_bits: Vec<u32>,
    /// Combined weight indexed by the compressed phase bits of the source index.
    table: Vec<Complex64>,
    /// Used when `table` is empty.
    terms: Vec<(usize, Complex64)>,
    /// Set when the flip mask has exactly two bits and the phase depends on
    /// no other bit.
    pair: Option<PairWeights>,
}

/// Weights of a two-bit flip group, indexed by the target's bits `(lo, hi)`.
#[derive(Clone, Debug)]
struct PairWeights {
    lo: u32,
    hi: u32,
    /// Nonzero `(target offset, weight)` pairs.
    active: Vec<(usize, Complex64)>,
    real: bool,
}

impl FlipGroup {
    fn compress(&self, s: usize) -> usize {
        self.phase_bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (((s >> b) & 1) << i))
    }

    fn weight(&self, s: usize) -> Complex64 {
        if self.table.is_empty() {
            self.terms
                .iter()
                .map(|&(z, w)| if (s & z).count_ones() % 2 == 0 { w } else { -w })
                .sum()
        } else {
            self.table[self.compress(s)]
        }
    }
}

/// A [`TermOperator`] compiled for repeated application to `2^L` vectors.
#[derive(Clone, Debug)]
pub struct CompiledOperator {
    sites: usize,
    diagonal: Vec<f64>,
    groups: Vec<FlipGroup>,
    norm_bound: f64,
}

impl CompiledOperator {
    pub fn new(op: &TermOperator) -> Self {
        let sites = op.sites();
        let dim = 1usize << sites;
        let mut diag_terms: Vec<(usize, f64)> = Vec::new();
        let mut by_flip: std::collections::BTreeMap<usize, Vec<(usize, Complex64)>> = Default::default();
        let mut norm_bound = 0.0;
        for term in op.terms() {
            let (mut flip, mut phase, mut n_y) = (0usize, 0usize, 0u32);
            for &(site, axis) in &term.factors {
                let bit = 1usize << site;
                match axis {
                    Axis::X => flip |= bit,
                    Axis::Y => {
                        flip |= bit;
                        phase |= bit;
                        n_y += 1;
                    }
                    Axis::Z => phase |= bit,
                }
            }
            let magnitude = term.coeff * 0.5f64.powi(term.factors.len() as i32);
            norm_bound += magnitude.abs();
            if flip == 0 {
                diag_terms.push((phase, magnitude));
                continue;
            }
            let weight = match n_y % 4 {
                0 => Complex64::new(magnitude, 0.0),
                1 => Complex64::new(0.0, magnitude),
                2 => Complex64::new(-magnitude, 0.0),
                _ => Complex64::new(0.0, -magnitude),
            };
            by_flip.entry(flip).or_default().push((phase, weight));
        }

        let diagonal = (0..dim)
            .map(|s| {
                diag_terms
                    .iter()
                    .map(|&(z, w)| if (s & z).count_ones() % 2 == 0 { w } else { -w })
                    .sum()
            })
            .collect();

        let groups = by_flip
            .into_iter()
            .map(|(flip, terms)| {
                let union = terms.iter().fold(0usize, |acc, t| acc | t.0);
                let phase_bits: Vec<u32> = (0..usize::BITS).filter(|&b| union >> b & 1 == 1).collect();
                let mut group = FlipGroup { flip, phase_bits, table: Vec::new(), terms, pair: None };
                if group.phase_bits.len() <= TABLE_BITS {
                    let table = (0..1usize << group.phase_bits.len())
                        .map(|c| {
                            let s = group
                                .phase_bits
                                .iter()
                                .enumerate()
                                .fold(0usize, |acc, (i, &b)| acc | (((c >> i) & 1) << b));
                            group.weight(s)
                        })
                        .collect();
                    group.table = table;
                }
                if flip.count_ones() == 2 && union & !flip == 0 {
                    let lo = flip.trailing_zeros();
                    let hi = usize::BITS - 1 - flip.leading_zeros();
                    let weights = [0usize, 1, 2, 3].map(|c| {
                        let t = ((c & 1) << lo) | ((c >> 1) << hi);
                        group.weight(t ^ flip)
                    });
                    let real = weights.iter().all(|w| w.im == 0.0);
                    let active = (0..4)
                        .filter(|&c| weights[c] != Complex64::new(0.0, 0.0))
                        .map(|c| (((c & 1) << lo) | ((c >> 1) << hi), weights[c]))
                        .collect();
                    group.pair = Some(PairWeights { lo, hi, active, real });
                }
                group
            })
            .collect();

        Self { sites, diagonal, groups, norm_bound }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    /// Sum of the absolute Pauli weights, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// `out = H · input`. Each output amplitude accumulates its
    /// contributions in a fixed order, so results are bit-reproducible.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(input.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        for ((o, &d), &v) in out.iter_mut().zip(&self.diagonal).zip(input) {
            *o = v * d;
        }
        for g in &self.groups {
            if let Some(p) = &g.pair {
                apply_pair(p, input, out);
                continue;
            }
            match g.phase_bits.as_slice() {
                [a, b] if !g.table.is_empty() => {
                    let (a, b) = (*a, *b);
                    for (t, o) in out.iter_mut().enumerate() {
                        let s = t ^ g.flip;
                        let idx = ((s >> a) & 1) | (((s >> b) & 1) << 1);
                        *o += g.table[idx] * input[s];
                    }
                }
                _ => {
                    for (t, o) in out.iter_mut().enumerate() {
                        let s = t ^ g.flip;
                        *o += g.weight(s) * input[s];
                    }
                }
            }
        }
    }

    /// `⟨ψ|H|ψ⟩` (real for Hermitian operators).
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(psi, &mut out);
        psi.iter().zip(&out).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

/// Visits the four targets sharing each assignment of the other bits;
/// zero weights are skipped and real weights use real arithmetic.
fn apply_pair(p: &PairWeights, input: &[Complex64], out: &mut [Complex64]) {
    let (lo, hi) = (p.lo, p.hi);
    let flip = (1usize << lo) | (1usize << hi);
    let (low_mask, high_mask) = ((1usize << lo) - 1, (1usize << hi) - 1);
    for r in 0..out.len() >> 2 {
        let x = ((r >> lo) << (lo + 1)) | (r & low_mask);
        let base = ((x >> hi) << (hi + 1)) | (x & high_mask);
        for &(offset, w) in &p.active {
            let t = base | offset;
            let v = input[t ^ flip];
            out[t] += if p.real { v * w.re } else { v * w };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Axis::{X, Y, Z};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_site_paulis() {
        let psi = [c(0.6, 0.0), c(0.0, 0.8)];
        let mut out = [c(0.0, 0.0); 2];
        for (axis, expect) in [
            (X, [c(0.0, 0.4), c(0.3, 0.0)]),
            (Y, [c(0.4, 0.0), c(0.0, 0.3)]),
            (Z, [c(0.3, 0.0), c(0.0, -0.4)]),
        ] {
            let op = TermOperator::from_terms(1, vec![(1.0, vec![(0, axis)])]).unwrap();
            CompiledOperator::new(&op).apply(&psi, &mut out);
            for k in 0..2 {
                assert!((out[k] - expect[k]).norm() < 1e-15, "{axis:?}: {out:?}");
            }
        }
    }

    #[test]
    fn flip_flop_pair_moves_amplitude() {
        // (XX + YY)/4 on |↑↓⟩ gives |↓↑⟩/2
        let op = TermOperator::from_terms(2, vec![(1.0, vec![(0, X), (1, X)]), (1.0, vec![(0, Y), (1, Y)])]).unwrap();
        let mut psi = [c(0.0, 0.0); 4];
        psi[0b10] = c(1.0, 0.0);
        let mut out = [c(0.0, 0.0); 4];
        CompiledOperator::new(&op).apply(&psi, &mut out);
        assert!((out[0b01] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(out[0b10].norm() < 1e-15 && out[0].norm() < 1e-15 && out[3].norm() < 1e-15);
    }

    #[test]
    fn wide_phase_masks_use_generic_path() {
        let l = 10;
        let factors: Vec<_> = (0..l).map(|j| (j, if j == 0 { X } else { Z })).collect();
        let op = TermOperator::from_terms(l, vec![(1.0, factors)]).unwrap();
        let compiled = CompiledOperator::new(&op);
        assert!(compiled.groups[0].table.is_empty());
        let psi: Vec<Complex64> = (0..1 << l).map(|i| c(i as f64, 0.0)).collect();
        let mut out = vec![c(0.0, 0.0); 1 << l];
        compiled.apply(&psi, &mut out);
        let t = 0b11_0000_0110usize;
        let s = t ^ 1;
        let sign = if (s >> 1).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(out[t], c(sign * s as f64 / 1024.0, 0.0));
    }
}
