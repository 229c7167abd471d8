//! Per-column dominance bitsets for the pairwise D engine.
//!
//! For column `j` and observation `i`, `sets[j][i]` marks the observations
//! ranked below `i` in column `j`. The dominance count of `i` in the pair
//! `(j, k)` is then a popcount of the intersection, with no sequential
//! dependence between observations.

use crate::data::RankMatrix;

const MAX_N: usize = 1024;
const MAX_BYTES: usize = 256 << 20;

pub(crate) struct DominanceSets {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    // (r - 1)(r - 2) and (r - 2) per observation, column-major
    a: Vec<i64>,
    b: Vec<i64>,
}

impl DominanceSets {
    /// `None` when the sets would be too large to be worth it.
    pub fn build(ranks: &RankMatrix, orders: &[Vec<u32>]) -> Option<Self> {
        let (n, p) = (ranks.n(), ranks.p());
        let words = n.div_ceil(64);
        if n > MAX_N || n * words * p * 8 > MAX_BYTES {
            return None;
        }
        let mut bits = vec![0u64; p * n * words];
        let mut a = Vec::with_capacity(n * p);
        let mut b = Vec::with_capacity(n * p);
        let mut cur = vec![0u64; words];
        for (j, order) in orders.iter().enumerate() {
            let col_bits = &mut bits[j * n * words..(j + 1) * n * words];
            cur.fill(0);
            for &obs in order {
                let obs = obs as usize;
                col_bits[obs * words..(obs + 1) * words].copy_from_slice(&cur);
                cur[obs / 64] |= 1u64 << (obs % 64);
            }
            for &r in ranks.column(j) {
                let r = r as i64;
                a.push((r - 1) * (r - 2));
                b.push(r - 2);
            }
        }
        Some(Self {
            n,
            words,
            bits,
            a,
            b,
        })
    }

    /// `P - 2(n-2)Q + (n-2)(n-3)S` for the pair `(j, k)`.
    pub fn d_numerator(&self, j: usize, k: usize) -> i64 {
        #[cfg(target_arch = "x86_64")]
        if std::arch::is_x86_feature_detected!("popcnt") {
            // SAFETY: the feature was just detected on this CPU
            return unsafe { self.d_numerator_popcnt(j, k) };
        }
        self.d_numerator_plain(j, k)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "popcnt")]
    unsafe fn d_numerator_popcnt(&self, j: usize, k: usize) -> i64 {
        self.d_numerator_plain(j, k)
    }

    #[inline(always)]
    fn d_numerator_plain(&self, j: usize, k: usize) -> i64 {
        match self.words {
            1 => self.sums::<1>(j, k),
            2 => self.sums::<2>(j, k),
            3 => self.sums::<3>(j, k),
            4 => self.sums::<4>(j, k),
            _ => self.sums_dyn(j, k),
        }
    }

    #[inline(always)]
    fn sums<const W: usize>(&self, j: usize, k: usize) -> i64 {
        let n = self.n;
        let (bj, _) = self.bits[j * n * W..(j + 1) * n * W].as_chunks::<W>();
        let (bk, _) = self.bits[k * n * W..(k + 1) * n * W].as_chunks::<W>();
        let (aj, ak) = (&self.a[j * n..(j + 1) * n], &self.a[k * n..(k + 1) * n]);
        let (cj, ck) = (&self.b[j * n..(j + 1) * n], &self.b[k * n..(k + 1) * n]);
        let (mut p, mut q, mut s) = (0i64, 0i64, 0i64);
        for i in 0..n {
            let mut c = 0u32;
            for w in 0..W {
                c += (bj[i][w] & bk[i][w]).count_ones();
            }
            let c = c as i64;
            p += aj[i] * ak[i];
            q += cj[i] * ck[i] * c;
            s += c * (c - 1);
        }
        finish(n, p, q, s)
    }

    #[inline(always)]
    fn sums_dyn(&self, j: usize, k: usize) -> i64 {
        let (n, w) = (self.n, self.words);
        let bj = &self.bits[j * n * w..(j + 1) * n * w];
        let bk = &self.bits[k * n * w..(k + 1) * n * w];
        let (aj, ak) = (&self.a[j * n..(j + 1) * n], &self.a[k * n..(k + 1) * n]);
        let (cj, ck) = (&self.b[j * n..(j + 1) * n], &self.b[k * n..(k + 1) * n]);
        let (mut p, mut q, mut s) = (0i64, 0i64, 0i64);
        for i in 0..n {
            let x = &bj[i * w..(i + 1) * w];
            let y = &bk[i * w..(i + 1) * w];
            let c = x
                .iter()
                .zip(y)
                .map(|(u, v)| (u & v).count_ones())
                .sum::<u32>() as i64;
            p += aj[i] * ak[i];
            q += cj[i] * ck[i] * c;
            s += c * (c - 1);
        }
        finish(n, p, q, s)
    }
}

fn finish(n: usize, p: i64, q: i64, s: i64) -> i64 {
    let n = n as i64;
    p - 2 * (n - 2) * q + (n - 2) * (n - 3) * s
}
