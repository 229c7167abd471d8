//! Fast rank statistics for a single pair of variables.
//!
//! Hoeffding's D uses the `P - 2(n-2)Q + (n-2)(n-3)S` decomposition with the
//! `c_i` dominance counts from a binary indexed tree, so it runs in
//! `O(n log n)`. Here `Q = sum (r_i - 2)(s_i - 2) c_i`.
//!
//! Bergsma-Dassios-Yanagimoto's tau* counts concordant quadruples from the
//! cumulative rank matrix `B[r, s]` in `O(n^2)` time. Only two adjacent rows
//! of `B` are ever read, so it is kept as one rolling row. BKR's R follows from the identity `3D + 2R = 5 tau*`.
//!
//! All counting is done in 128-bit integers and the three statistics share
//! one exact denominator, so the identity holds up to the final division.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::PairedRanks;
use crate::error::{Error, Result};
use crate::fenwick::Fenwick;

/// The three consistent rank correlations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KernelKind {
    /// Hoeffding's D, kernel order 5.
    HoeffdingD,
    /// Blum-Kiefer-Rosenblatt's R, kernel order 6.
    BkrR,
    /// Bergsma-Dassios-Yanagimoto's tau*, kernel order 4.
    TauStar,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [
        KernelKind::HoeffdingD,
        KernelKind::BkrR,
        KernelKind::TauStar,
    ];

    /// Kernel order `m`.
    pub fn order(self) -> usize {
        match self {
            KernelKind::HoeffdingD => 5,
            KernelKind::BkrR => 6,
            KernelKind::TauStar => 4,
        }
    }

    /// Short name used on the command line and in output files.
    pub fn short_name(self) -> &'static str {
        match self {
            KernelKind::HoeffdingD => "d",
            KernelKind::BkrR => "r",
            KernelKind::TauStar => "taustar",
        }
    }

    /// Smallest sample size at which the fast statistic is defined.
    pub fn min_n(self) -> usize {
        self.order()
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d" | "hoeffding" | "hoeffdingd" => Ok(KernelKind::HoeffdingD),
            "r" | "bkr" | "bkrr" => Ok(KernelKind::BkrR),
            "taustar" | "tau*" | "tau_star" | "t" => Ok(KernelKind::TauStar),
            other => Err(format!(
                "unknown statistic '{other}' (expected d, r or taustar)"
            )),
        }
    }
}

/// The counts behind Hoeffding's D.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTriple {
    pub p: i128,
    pub q: i128,
    pub s: i128,
    /// `c[i]`: number of observations below observation `i` in both coordinates.
    pub c: Vec<u32>,
}

/// Dominance counts `c_i` and the `P`, `Q`, `S` sums.
pub fn concordance_counts(pr: &PairedRanks) -> CountTriple {
    let n = pr.n();
    let s_by_r = pr.s_by_r();
    let mut c_sorted = vec![0u32; n];
    let mut scratch = Scratch::new(n);
    scratch.dominance_counts(&s_by_r, &mut c_sorted);
    let mut c = vec![0u32; n];
    for (i, &ri) in pr.r().iter().enumerate() {
        c[i] = c_sorted[ri as usize - 1];
    }
    let (p, q, s) = pqs_sums(&s_by_r, &c_sorted);
    CountTriple { p, q, s, c }
}

/// Hoeffding's D, scaled so that `D = 1` when the two rankings agree.
pub fn hoeffding_d(pr: &PairedRanks) -> Result<f64> {
    let n = pr.n();
    require_n(n, 5)?;
    let s_by_r = pr.s_by_r();
    let mut scratch = Scratch::new(n);
    let num = scratch.d_numerator(&s_by_r);
    Ok(ratio(30 * num, d_denominator(n)))
}

/// Bergsma-Dassios-Yanagimoto's tau*.
pub fn tau_star(pr: &PairedRanks) -> Result<f64> {
    let n = pr.n();
    require_n(n, 4)?;
    let s_by_r = pr.s_by_r();
    let mut scratch = Scratch::new(n);
    let nc = scratch.concordant_quadruples(&s_by_r);
    let quads = binomial(n as u128, 4) as i128;
    Ok(ratio(3 * nc as i128 - quads, 2 * quads))
}

/// Blum-Kiefer-Rosenblatt's R, from `R = (5 tau* - 3D) / 2`.
pub fn bkr_r(pr: &PairedRanks) -> Result<f64> {
    require_n(pr.n(), 6)?;
    Ok(pair_stats(pr)?.r)
}

/// All three statistics for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    pub d: f64,
    pub r: f64,
    pub tau_star: f64,
}

impl PairStats {
    pub fn get(&self, kind: KernelKind) -> f64 {
        match kind {
            KernelKind::HoeffdingD => self.d,
            KernelKind::BkrR => self.r,
            KernelKind::TauStar => self.tau_star,
        }
    }
}

/// Computes D, R and tau* together. Requires `n >= 6`.
pub fn pair_stats(pr: &PairedRanks) -> Result<PairStats> {
    let n = pr.n();
    require_n(n, 6)?;
    let mut scratch = Scratch::new(n);
    let exact = scratch.exact(&pr.s_by_r(), Needs::ALL);
    Ok(exact.to_stats())
}

fn require_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(Error::SampleTooSmall { n, min })
    } else {
        Ok(())
    }
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn d_denominator(n: usize) -> i128 {
    let n = n as i128;
    n * (n - 1) * (n - 2) * (n - 3) * (n - 4)
}

fn ratio(num: i128, den: i128) -> f64 {
    num as f64 / den as f64
}

fn pqs_sums(s_by_r: &[u32], c: &[u32]) -> (i128, i128, i128) {
    let (mut p, mut q, mut s) = (0i128, 0i128, 0i128);
    for (idx, (&si, &ci)) in s_by_r.iter().zip(c).enumerate() {
        let r = idx as i128 + 1;
        let sv = si as i128;
        let cv = ci as i128;
        p += (r - 1) * (r - 2) * (sv - 1) * (sv - 2);
        q += (r - 2) * (sv - 2) * cv;
        s += cv * (cv - 1);
    }
    (p, q, s)
}

// Fused bitset pass; every term stays far below 2^63 at this size.
#[inline(always)]
fn d_numerator_small(n: usize, s_by_r: &[u32]) -> i64 {
    let n = n as i64;
    let mut bits = [0u64; BITSET_MAX_N / 64];
    let words = s_by_r.len().div_ceil(64);
    let (mut p, mut q, mut s) = (0i64, 0i64, 0i64);
    for (idx, &si) in s_by_r.iter().enumerate() {
        let bit = si as usize - 1;
        // branch-free masks: the word holding `bit` is the only data-dependent part
        let mut count = 0u32;
        for (w, word) in bits[..words].iter().enumerate() {
            let k = bit.saturating_sub(64 * w).min(64) as u32;
            let mask = ((1u128 << k) - 1) as u64;
            count += (word & mask).count_ones();
        }
        bits[bit / 64] |= 1u64 << (bit % 64);
        let r = idx as i64 + 1;
        let sv = si as i64;
        let cv = count as i64;
        p += (r - 1) * (r - 2) * (sv - 1) * (sv - 2);
        q += (r - 2) * (sv - 2) * cv;
        s += cv * (cv - 1);
    }
    p - 2 * (n - 2) * q + (n - 2) * (n - 3) * s
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "popcnt")]
unsafe fn d_numerator_small_popcnt(n: usize, s_by_r: &[u32]) -> i64 {
    d_numerator_small(n, s_by_r)
}

/// Which counts a caller needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Needs {
    pub d: bool,
    pub tau: bool,
}

impl Needs {
    pub const ALL: Needs = Needs { d: true, tau: true };

    pub fn for_kinds(kinds: &[KernelKind]) -> Self {
        let mut needs = Needs {
            d: false,
            tau: false,
        };
        for k in kinds {
            match k {
                KernelKind::HoeffdingD => needs.d = true,
                KernelKind::TauStar => needs.tau = true,
                KernelKind::BkrR => needs = Needs::ALL,
            }
        }
        needs
    }
}

/// Exact numerators over the common denominator `n(n-1)(n-2)(n-3)(n-4)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExactPair {
    pub denom: i128,
    pub d_num: i128,
    pub tau_num: i128,
    pub r_num: i128,
}

impl ExactPair {
    /// From the raw D numerator and `3 N_c - C(n, 4)`.
    pub fn new(n: usize, d_raw: i128, x: i128) -> Self {
        let nm4 = n as i128 - 4;
        ExactPair {
            denom: d_denominator(n),
            d_num: 30 * d_raw,
            tau_num: 12 * x * nm4,
            r_num: 30 * x * nm4 - 45 * d_raw,
        }
    }

    pub fn to_stats(self) -> PairStats {
        PairStats {
            d: ratio(self.d_num, self.denom),
            r: ratio(self.r_num, self.denom),
            tau_star: ratio(self.tau_num, self.denom),
        }
    }
}

// Buffers reused across pairs by the pairwise engine.
pub(crate) struct Scratch {
    n: usize,
    bits: Vec<u64>,
    fenwick: Fenwick,
    row: Vec<u32>,
    c: Vec<u32>,
}

// Below this size a popcount over a bitset beats the tree.
const BITSET_MAX_N: usize = 256;

impl Scratch {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            bits: Vec::new(),
            fenwick: Fenwick::new(0),
            row: Vec::new(),
            c: Vec::new(),
        }
    }

    /// `c[t]` = number of earlier positions holding a smaller value.
    pub fn dominance_counts(&mut self, s_by_r: &[u32], c: &mut [u32]) {
        let n = self.n;
        debug_assert_eq!(s_by_r.len(), n);
        if n <= BITSET_MAX_N {
            self.bits.clear();
            self.bits.resize(n / 64 + 1, 0);
            for (out, &s) in c.iter_mut().zip(s_by_r) {
                let bit = s as usize - 1;
                let (word, off) = (bit / 64, bit % 64);
                let mut count = 0u32;
                for w in &self.bits[..word] {
                    count += w.count_ones();
                }
                count += (self.bits[word] & ((1u64 << off) - 1)).count_ones();
                self.bits[word] |= 1u64 << off;
                *out = count;
            }
        } else {
            self.fenwick = Fenwick::new(n);
            for (out, &s) in c.iter_mut().zip(s_by_r) {
                *out = self.fenwick.prefix(s as usize - 1);
                self.fenwick.increment(s as usize);
            }
        }
    }

    /// `P - 2(n-2)Q + (n-2)(n-3)S`.
    pub fn d_numerator(&mut self, s_by_r: &[u32]) -> i128 {
        if self.n <= BITSET_MAX_N {
            return self.d_numerator_small(s_by_r) as i128;
        }
        let mut c = std::mem::take(&mut self.c);
        c.resize(self.n, 0);
        self.dominance_counts(s_by_r, &mut c);
        let (p, q, s) = pqs_sums(s_by_r, &c);
        self.c = c;
        let n = self.n as i128;
        p - 2 * (n - 2) * q + (n - 2) * (n - 3) * s
    }

    fn d_numerator_small(&mut self, s_by_r: &[u32]) -> i64 {
        #[cfg(target_arch = "x86_64")]
        if std::arch::is_x86_feature_detected!("popcnt") {
            // SAFETY: the feature was just detected on this CPU
            return unsafe { d_numerator_small_popcnt(self.n, s_by_r) };
        }
        d_numerator_small(self.n, s_by_r)
    }

    /// `N_c`, the number of concordant quadruples.
    pub fn concordant_quadruples(&mut self, s_by_r: &[u32]) -> u128 {
        let n = self.n;
        // row[v] = B[l - 1, v]: points among the first l - 1 with s <= v
        self.row.clear();
        self.row.resize(n + 1, 0);
        let row = &mut self.row;
        let mut total = 0u128;
        for l in 1..=n {
            let a = s_by_r[l - 1] as usize;
            if l >= 3 {
                let below_l = (l - 1) as u64;
                let mut acc = 0u64;
                for &b in &s_by_r[l..] {
                    let b = b as usize;
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    let below = row[lo - 1] as u64;
                    let above = below_l - row[hi] as u64;
                    acc += below * below.wrapping_sub(1) / 2 + above * above.wrapping_sub(1) / 2;
                }
                total += acc as u128;
            }
            for v in &mut row[a..] {
                *v += 1;
            }
        }
        total
    }

    /// `3 N_c - C(n, 4)`.
    pub fn tau_excess(&mut self, s_by_r: &[u32]) -> i128 {
        let quads = binomial(self.n as u128, 4) as i128;
        3 * self.concordant_quadruples(s_by_r) as i128 - quads
    }

    pub fn exact(&mut self, s_by_r: &[u32], needs: Needs) -> ExactPair {
        debug_assert!(self.n >= 5);
        let d_raw = if needs.d { self.d_numerator(s_by_r) } else { 0 };
        let x = if needs.tau {
            self.tau_excess(s_by_r)
        } else {
            0
        };
        ExactPair::new(self.n, d_raw, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(r: &[u32], s: &[u32]) -> PairedRanks {
        PairedRanks::new(r.to_vec(), s.to_vec()).unwrap()
    }

    #[test]
    fn full_concordance_counts() {
        let t = concordance_counts(&pr(&[1, 2, 3, 4, 5], &[1, 2, 3, 4, 5]));
        assert_eq!(t.c, vec![0, 1, 2, 3, 4]);
        assert_eq!(
            t.s,
            t.c.iter().map(|&c| (c * c.saturating_sub(1)) as i128).sum()
        );
    }

    #[test]
    fn full_discordance_counts() {
        let t = concordance_counts(&pr(&[1, 2, 3, 4, 5], &[5, 4, 3, 2, 1]));
        assert_eq!(t.c, vec![0; 5]);
        assert_eq!(t.s, 0);
    }

    #[test]
    fn counts_follow_observation_order() {
        // observation 0 sits above both others
        let t = concordance_counts(&pr(&[3, 1, 2], &[3, 2, 1]));
        assert_eq!(t.c, vec![2, 0, 0]);
    }

    #[test]
    fn identical_rankings_give_one() {
        for n in [6usize, 7, 10, 33, 300] {
            let id: Vec<u32> = (1..=n as u32).collect();
            let p = pr(&id, &id);
            assert_eq!(hoeffding_d(&p).unwrap(), 1.0, "n = {n}");
            assert_eq!(tau_star(&p).unwrap(), 1.0, "n = {n}");
            assert_eq!(bkr_r(&p).unwrap(), 1.0, "n = {n}");
        }
    }

    #[test]
    fn tau_star_on_four_points() {
        let p = pr(&[1, 2, 3, 4], &[1, 2, 3, 4]);
        let mut scratch = Scratch::new(4);
        assert_eq!(scratch.concordant_quadruples(&p.s_by_r()), 1);
        assert_eq!(tau_star(&p).unwrap(), 1.0);
    }

    #[test]
    fn small_samples_are_rejected() {
        let p = pr(&[1, 2, 3, 4], &[2, 1, 4, 3]);
        assert_eq!(hoeffding_d(&p), Err(Error::SampleTooSmall { n: 4, min: 5 }));
        assert!(tau_star(&p).is_ok());
        let p5 = pr(&[1, 2, 3, 4, 5], &[2, 1, 4, 3, 5]);
        assert_eq!(bkr_r(&p5), Err(Error::SampleTooSmall { n: 5, min: 6 }));
        let p3 = pr(&[1, 2, 3], &[2, 1, 3]);
        assert_eq!(tau_star(&p3), Err(Error::SampleTooSmall { n: 3, min: 4 }));
    }

    #[test]
    fn bitset_and_tree_agree() {
        // n above the bitset cutoff exercises the tree path
        let n = 600u32;
        let s: Vec<u32> = (0..n).map(|i| (i * 337) % n + 1).collect();
        let mut c_tree = vec![0; n as usize];
        Scratch::new(n as usize).dominance_counts(&s, &mut c_tree);
        let brute: Vec<u32> = (0..n as usize)
            .map(|t| s[..t].iter().filter(|&&v| v < s[t]).count() as u32)
            .collect();
        assert_eq!(c_tree, brute);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in KernelKind::ALL {
            assert_eq!(k.short_name().parse::<KernelKind>().unwrap(), k);
        }
        assert!("spearman".parse::<KernelKind>().is_err());
    }
}
