//! Preamble detection by normalized cross-correlation.
//!
//! Both the window and the template are mean-removed, so a constant ambient
//! offset or a gain change does not move the correlation peak. The template
//! is piecewise constant, so each window is evaluated from prefix sums: one
//! subtraction per constant run of the template. A cheaper pre-check over the
//! alternating lock section, evaluated in constant time per offset, rejects
//! most offsets before the full correlation is computed.

use super::modulate::half_chip_levels;
use crate::framing::ppdu::LOCK_CHIPS;
use crate::framing::preamble_chips;
use crate::phy_modes::Family;

pub const DEFAULT_THRESHOLD: f64 = 0.75;
/// Lock-section correlation below which the full correlation is skipped.
const GATE: f64 = 0.5;
/// Minimum correlation of the marker section alone.
const MARKER_GATE: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
struct Run {
    start: usize,
    len: usize,
    sign: f64,
}

/// Sample-domain preamble template for one family and sps.
#[derive(Debug, Clone)]
pub struct PreambleTemplate {
    pub family: Family,
    pub sps: usize,
    len: usize,
    // runs outside the alternating stretch, see `Correlator::correlation`
    rest: Vec<Run>,
    // the family marker alone: runs clipped to it, its span, mean and norm
    marker: Vec<Run>,
    marker_span: (usize, usize),
    marker_mean: f64,
    marker_norm: f64,
    mean: f64,
    norm: f64,
    // longest stretch of equal-length alternating runs
    alt_start: usize,
    alt_run: usize,
    alt_count: usize,
    alt_first_sign: f64,
}

impl PreambleTemplate {
    pub fn new(family: Family, sps: usize) -> Self {
        assert!(sps >= 2 && sps.is_multiple_of(2), "sps must be even and >= 2");
        let half = sps / 2;
        let levels = half_chip_levels(&preamble_chips(family), family);
        let mut runs: Vec<Run> = Vec::new();
        for (i, &l) in levels.iter().enumerate() {
            match runs.last_mut() {
                Some(r) if r.sign == l as f64 => r.len += half,
                _ => runs.push(Run { start: i * half, len: half, sign: l as f64 }),
            }
        }
        let len = levels.len() * half;
        let sum: f64 = runs.iter().map(|r| r.sign * r.len as f64).sum();
        let mean = sum / len as f64;
        // sum (t - mean)^2 = len - len*mean^2 for t in {-1, +1}
        let norm = (len as f64 * (1.0 - mean * mean)).sqrt();

        let (mut best_i, mut best_n) = (0, 0);
        let mut i = 0;
        while i < runs.len() {
            let mut j = i + 1;
            while j < runs.len() && runs[j].len == runs[i].len {
                j += 1;
            }
            if j - i > best_n {
                best_i = i;
                best_n = j - i;
            }
            i = j;
        }
        // an even count keeps the lock template zero-mean
        let alt_count = best_n & !1;
        let rest = runs.iter().enumerate().filter(|&(i, _)| i < best_i || i >= best_i + alt_count).map(|(_, r)| *r).collect();
        let span = (LOCK_CHIPS * sps, len);
        let marker: Vec<Run> = runs
            .iter()
            .filter(|r| r.start + r.len > span.0)
            .map(|r| {
                let start = r.start.max(span.0);
                Run { start, len: r.start + r.len - start, sign: r.sign }
            })
            .collect();
        let n = (span.1 - span.0) as f64;
        let marker_mean = marker.iter().map(|r| r.sign * r.len as f64).sum::<f64>() / n;
        PreambleTemplate {
            rest,
            marker,
            marker_span: span,
            marker_mean,
            marker_norm: (n * (1.0 - marker_mean * marker_mean)).sqrt(),
            family,
            sps,
            len,
            alt_start: runs[best_i].start,
            alt_run: runs[best_i].len,
            alt_first_sign: runs[best_i].sign,
            alt_count,
            mean,
            norm,
        }
    }

    /// Template length in samples.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// A detected preamble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Index of the first preamble sample.
    pub start: usize,
    /// Index of the first sample after the preamble.
    pub data_offset: usize,
    pub peak: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchOutcome {
    Found(Detection),
    /// No detection among the offsets that could be evaluated; resume at
    /// this offset once more samples arrive.
    NeedMore(usize),
}

/// Append-only sample buffer with the running sums the correlator needs.
#[derive(Debug, Clone)]
pub struct Correlator {
    template: PreambleTemplate,
    threshold: f64,
    samples: Vec<f32>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    // alternating sum of boxcars of length alt_run, see `lock_dot`
    alt: Vec<f64>,
}

impl Correlator {
    pub fn new(template: PreambleTemplate, threshold: f64) -> Self {
        Correlator { template, threshold, samples: Vec::new(), sum: vec![0.0], sum_sq: vec![0.0], alt: Vec::new() }
    }

    pub fn template(&self) -> &PreambleTemplate {
        &self.template
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn extend(&mut self, block: &[f32]) {
        self.samples.reserve(block.len());
        let (mut s, mut q) = (*self.sum.last().unwrap(), *self.sum_sq.last().unwrap());
        for &x in block {
            let x = x as f64;
            s += x;
            q += x * x;
            self.sum.push(s);
            self.sum_sq.push(q);
        }
        self.samples.extend_from_slice(block);
        let l = self.template.alt_run;
        while self.alt.len() + l <= self.samples.len() {
            let i = self.alt.len();
            let boxcar = self.sum[i + l] - self.sum[i];
            let prev = if i >= l { self.alt[i - l] } else { 0.0 };
            self.alt.push(boxcar - prev);
        }
    }

    /// Drops the first `n` samples; indices shift down by `n`.
    pub fn discard(&mut self, n: usize) {
        let n = n.min(self.samples.len());
        let rest = self.samples.split_off(n);
        self.samples.clear();
        self.sum.truncate(1);
        self.sum_sq.truncate(1);
        self.alt.clear();
        self.extend(&rest);
    }

    fn range_sum(&self, a: usize, b: usize) -> f64 {
        self.sum[b] - self.sum[a]
    }

    fn centered_norm(&self, a: usize, b: usize) -> f64 {
        let n = (b - a) as f64;
        let s = self.range_sum(a, b);
        let var = (self.sum_sq[b] - self.sum_sq[a]) - s * s / n;
        var.max(0.0).sqrt()
    }

    /// Correlation of the lock section alone at window offset `k`.
    /// Dot product of the window with the alternating stretch of the
    /// template, in constant time.
    fn lock_dot(&self, k: usize) -> f64 {
        let t = &self.template;
        let l = t.alt_run;
        let a = t.alt_count;
        let i = k + t.alt_start;
        let end = i + (a - 1) * l;
        let tail = if i >= l { self.alt[i - l] } else { 0.0 };
        let sign = if a % 2 == 1 { 1.0 } else { -1.0 };
        t.alt_first_sign * (sign * self.alt[end] + tail)
    }

    fn lock_correlation(&self, k: usize) -> f64 {
        let t = &self.template;
        let (l, a) = (t.alt_run, t.alt_count);
        let i = k + t.alt_start;
        let dot = self.lock_dot(k);
        let norm = self.centered_norm(i, i + a * l);
        if norm < 1e-12 {
            return 0.0;
        }
        dot / (norm * ((a * l) as f64).sqrt())
    }

    /// Full normalized correlation at window offset `k`.
    pub fn correlation(&self, k: usize) -> f64 {
        let t = &self.template;
        let end = k + t.len;
        let norm = self.centered_norm(k, end);
        if norm < 1e-12 {
            return 0.0;
        }
        let dot = self.lock_dot(k) + t.rest.iter().map(|r| r.sign * self.range_sum(k + r.start, k + r.start + r.len)).sum::<f64>();
        (dot - t.mean * self.range_sum(k, end)) / (norm * t.norm)
    }

    /// Normalized correlation of the family marker section alone. Long
    /// alternating stretches inside frame bodies match the lock section but
    /// not the marker.
    fn marker_correlation(&self, k: usize) -> f64 {
        let t = &self.template;
        let (a, b) = (k + t.marker_span.0, k + t.marker_span.1);
        let norm = self.centered_norm(a, b);
        if norm < 1e-12 {
            return 0.0;
        }
        let dot: f64 = t.marker.iter().map(|r| r.sign * self.range_sum(k + r.start, k + r.start + r.len)).sum();
        (dot - t.marker_mean * self.range_sum(a, b)) / (norm * t.marker_norm)
    }

    /// Searches for the next preamble starting at offset `from`. With
    /// `flush`, offsets near the end of the buffer are evaluated without the
    /// full peak-search lookahead.
    pub fn search(&self, from: usize, flush: bool) -> SearchOutcome {
        let p = self.template.len;
        let lookahead = 4 * self.template.sps;
        let n = self.samples.len();
        if n < p {
            return SearchOutcome::NeedMore(from);
        }
        let last = n - p;
        let mut k = from;
        while k <= last {
            if self.lock_correlation(k) >= GATE {
                let rho = self.correlation(k);
                if rho >= self.threshold && self.marker_correlation(k) >= MARKER_GATE {
                    if k + lookahead > last && !flush {
                        return SearchOutcome::NeedMore(k);
                    }
                    let (mut best, mut best_rho) = (k, rho);
                    for j in k + 1..=(k + lookahead).min(last) {
                        let r = self.correlation(j);
                        if r > best_rho {
                            best = j;
                            best_rho = r;
                        }
                    }
                    return SearchOutcome::Found(Detection { start: best, data_offset: best + p, peak: best_rho });
                }
            }
            k += 1;
        }
        SearchOutcome::NeedMore(k)
    }
}

/// Offsets of the first post-preamble sample of every frame in `samples`.
pub fn synchronize(samples: &[f32], family: Family, sps: usize, threshold: f64) -> Vec<usize> {
    let mut c = Correlator::new(PreambleTemplate::new(family, sps), threshold);
    c.extend(samples);
    let mut out = Vec::new();
    let mut from = 0;
    while let SearchOutcome::Found(d) = c.search(from, true) {
        out.push(d.data_offset);
        from = d.data_offset;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{modulate, Levels};
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;
    use rand_pcg::Pcg64;

    fn preamble_samples(family: Family, sps: usize) -> Vec<f32> {
        modulate(&preamble_chips(family), family, sps, Levels::default()).unwrap().samples
    }

    // direct O(P) evaluation used as an oracle for the prefix-sum path
    fn brute_correlation(x: &[f32], t: &[f32]) -> f64 {
        let n = t.len() as f64;
        let mx = x.iter().map(|&v| v as f64).sum::<f64>() / n;
        let mt = t.iter().map(|&v| v as f64).sum::<f64>() / n;
        let (mut num, mut dx, mut dt) = (0.0, 0.0, 0.0);
        for (&a, &b) in x.iter().zip(t) {
            let (a, b) = (a as f64 - mx, b as f64 - mt);
            num += a * b;
            dx += a * a;
            dt += b * b;
        }
        if dx < 1e-12 {
            0.0
        } else {
            num / (dx * dt).sqrt()
        }
    }

    #[test]
    fn fast_correlation_matches_brute_force() {
        let mut rng = Pcg64::seed_from_u64(3);
        for family in [Family::Ook, Family::Vppm] {
            for sps in [2, 4, 8] {
                let t = preamble_samples(family, sps);
                let mut s: Vec<f32> = (0..3 * t.len()).map(|_| rng.random::<f32>()).collect();
                s[t.len()..2 * t.len()].copy_from_slice(&t);
                let mut c = Correlator::new(PreambleTemplate::new(family, sps), DEFAULT_THRESHOLD);
                c.extend(&s[..100]);
                c.extend(&s[100..]);
                for k in (0..2 * t.len()).step_by(7) {
                    let fast = c.correlation(k);
                    let slow = brute_correlation(&s[k..k + t.len()], &t);
                    assert!((fast - slow).abs() < 1e-9, "{family} sps {sps} k {k}: {fast} vs {slow}");
                }
                assert!((c.correlation(t.len()) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lock_correlation_matches_brute_force() {
        let mut rng = Pcg64::seed_from_u64(4);
        for family in [Family::Ook, Family::Vppm] {
            let sps = 8;
            let tpl = PreambleTemplate::new(family, sps);
            let full = preamble_samples(family, sps);
            let lock = &full[tpl.alt_start..tpl.alt_start + tpl.alt_count * tpl.alt_run];
            let s: Vec<f32> = (0..4000).map(|_| rng.random::<f32>()).collect();
            let mut c = Correlator::new(tpl.clone(), DEFAULT_THRESHOLD);
            c.extend(&s);
            for k in (0..2000).step_by(13) {
                let i = k + tpl.alt_start;
                let slow = brute_correlation(&s[i..i + lock.len()], lock);
                assert!((c.lock_correlation(k) - slow).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn clean_preamble_at_zero() {
        for family in [Family::Ook, Family::Vppm] {
            let mut s = preamble_samples(family, 8);
            s.extend(std::iter::repeat_n(0.0, 200));
            assert_eq!(synchronize(&s, family, 8, DEFAULT_THRESHOLD), vec![96 * 8]);
        }
    }

    #[test]
    fn dc_offset_and_gain_do_not_matter() {
        let s: Vec<f32> = preamble_samples(Family::Ook, 4).iter().map(|&x| 0.3 + 0.2 * x).collect();
        let mut padded = vec![0.3; 50];
        padded.extend(s);
        assert_eq!(synchronize(&padded, Family::Ook, 4, DEFAULT_THRESHOLD), vec![50 + 96 * 4]);
    }

    #[test]
    fn alternating_data_is_not_a_preamble() {
        for family in [Family::Ook, Family::Vppm] {
            let alt: Vec<u8> = (0..400).map(|i| (i % 2) as u8).collect();
            let mut chips = alt.clone();
            chips.extend(preamble_chips(family));
            chips.extend(&alt);
            let x = modulate(&chips, family, 4, Levels::default()).unwrap().samples;
            assert_eq!(synchronize(&x, family, 4, DEFAULT_THRESHOLD), vec![(400 + crate::framing::PREAMBLE_CHIPS) * 4], "{family}");
        }
    }

    #[test]
    fn no_detection_in_noise() {
        let mut rng = Pcg64::seed_from_u64(8);
        let s: Vec<f32> = (0..200_000).map(|_| 0.5 + 0.1 * rng.sample::<f32, _>(StandardNormal)).collect();
        for family in [Family::Ook, Family::Vppm] {
            assert!(synchronize(&s, family, 8, DEFAULT_THRESHOLD).is_empty());
        }
    }

    #[test]
    fn discard_keeps_offsets_consistent() {
        let t = preamble_samples(Family::Ook, 4);
        let mut s = vec![0.0; 300];
        s.extend(&t);
        let mut c = Correlator::new(PreambleTemplate::new(Family::Ook, 4), DEFAULT_THRESHOLD);
        c.extend(&s);
        c.discard(100);
        match c.search(0, true) {
            SearchOutcome::Found(d) => assert_eq!(d.start, 200),
            other => panic!("{other:?}"),
        }
    }
}
