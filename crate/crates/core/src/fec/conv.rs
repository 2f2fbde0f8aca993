//! K=7 convolutional code with generators 133, 171, 165 (octal) and a
//! hard-decision Viterbi decoder.
//!
//! The rate-1/3 mother code emits one bit per generator per input bit. Rate
//! 1/4 repeats the first generator's bit after the three mother bits. Rate
//! 2/3 punctures with period 2: the first input of each pair keeps the
//! outputs of generators 133 and 171, the second keeps only 133. Six zero tail
//! bits return the encoder to the all-zero state.

use super::FecError;
use crate::phy_modes::CcRate;

pub const CONSTRAINT_LENGTH: usize = 7;
pub const GENERATORS: [u8; 3] = [0o133, 0o171, 0o165];
pub const TAIL_BITS: usize = CONSTRAINT_LENGTH - 1;

const STATES: usize = 1 << TAIL_BITS;
/// Coded-bit value that contributes no branch metric.
pub const ERASED: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvCode {
    pub rate: CcRate,
}

impl ConvCode {
    pub const fn new(rate: CcRate) -> Self {
        ConvCode { rate }
    }

    /// Generator indices emitted at trellis step `step`.
    fn pattern(self, step: usize) -> &'static [usize] {
        match self.rate {
            CcRate::Third => &[0, 1, 2],
            CcRate::Quarter => &[0, 1, 2, 0],
            CcRate::TwoThirds if step.is_multiple_of(2) => &[0, 1],
            CcRate::TwoThirds => &[0],
        }
    }

    /// Coded length for `steps` trellis steps (input plus tail).
    fn coded_len_steps(self, steps: usize) -> usize {
        match self.rate {
            CcRate::Third => 3 * steps,
            CcRate::Quarter => 4 * steps,
            CcRate::TwoThirds => steps + steps.div_ceil(2),
        }
    }

    /// Output length for `input_len` information bits, tail included.
    pub fn encoded_len(self, input_len: usize) -> usize {
        self.coded_len_steps(input_len + TAIL_BITS)
    }

    /// Inverse of [`encoded_len`](Self::encoded_len).
    pub fn decoded_len(self, coded_len: usize) -> Option<usize> {
        let steps = match self.rate {
            CcRate::Third => coded_len / 3,
            CcRate::Quarter => coded_len / 4,
            CcRate::TwoThirds => coded_len * 2 / 3,
        };
        (steps >= TAIL_BITS && self.coded_len_steps(steps) == coded_len).then(|| steps - TAIL_BITS)
    }

    pub fn encode(self, bits: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len(bits.len()));
        let mut reg = 0u8;
        let tail = std::iter::repeat_n(0u8, TAIL_BITS);
        for (step, b) in bits.iter().copied().chain(tail).enumerate() {
            reg = (reg >> 1) | ((b & 1) << 6);
            let outs = branch_outputs(reg);
            out.extend(self.pattern(step).iter().map(|&g| outs[g]));
        }
        out
    }

    /// Maximum-likelihood decode under the Hamming metric. The trellis starts
    /// and ends in the zero state.
    pub fn decode(self, coded: &[u8]) -> Result<Vec<u8>, FecError> {
        if coded.is_empty() {
            return Ok(Vec::new());
        }
        let info_len = self.decoded_len(coded.len()).ok_or(FecError::Size {
            expected: self.encoded_len(self.rough_info_len(coded.len())),
            got: coded.len(),
        })?;
        let steps = info_len + TAIL_BITS;
        let table = output_table();

        let mut metric = [u32::MAX / 2; STATES];
        metric[0] = 0;
        let mut next = [0u32; STATES];
        // one bit per destination state: which predecessor survived
        let mut decisions: Vec<u64> = Vec::with_capacity(steps);
        let mut pos = 0;
        for step in 0..steps {
            let pat = self.pattern(step);
            let rx = &coded[pos..pos + pat.len()];
            pos += pat.len();
            // branch metric for each of the 8 possible output triples
            let mut bm = [0u32; 8];
            for (triple, m) in bm.iter_mut().enumerate() {
                *m = pat
                    .iter()
                    .zip(rx)
                    .filter(|&(&g, &r)| r != ERASED && r != (triple as u8 >> (2 - g)) & 1)
                    .count() as u32;
            }
            let mut dec = 0u64;
            for (ns, slot) in next.iter_mut().enumerate() {
                let input = (ns >> 5) as u8;
                let base = (ns & 31) << 1;
                let mut best = u32::MAX;
                let mut pick = 0;
                for x in 0..2 {
                    let prev = base | x;
                    let reg = (input << 6) | prev as u8;
                    let m = metric[prev] + bm[table[reg as usize] as usize];
                    if m < best {
                        best = m;
                        pick = x;
                    }
                }
                *slot = best;
                dec |= (pick as u64) << ns;
            }
            decisions.push(dec);
            metric = next;
        }

        let mut state = 0usize;
        let mut bits = vec![0u8; steps];
        for step in (0..steps).rev() {
            bits[step] = (state >> 5) as u8;
            let x = (decisions[step] >> state) & 1;
            state = ((state & 31) << 1) | x as usize;
        }
        bits.truncate(info_len);
        Ok(bits)
    }

    fn rough_info_len(self, coded: usize) -> usize {
        (coded as f64 * self.rate.as_f64()).round() as usize
    }
}

fn parity(x: u8) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Generator outputs for a 7-bit register whose bit 6 holds the newest input.
fn branch_outputs(reg: u8) -> [u8; 3] {
    GENERATORS.map(|g| parity(reg & g))
}

/// Register value to packed output triple (generator 0 in the MSB).
fn output_table() -> [u8; 128] {
    let mut t = [0u8; 128];
    for (reg, slot) in t.iter_mut().enumerate() {
        let o = branch_outputs(reg as u8);
        *slot = (o[0] << 2) | (o[1] << 1) | o[2];
    }
    t
}

pub fn conv_encode(bits: &[u8], code: ConvCode) -> Vec<u8> {
    code.encode(bits)
}

pub fn viterbi_decode(bits: &[u8], code: ConvCode) -> Result<Vec<u8>, FecError> {
    code.decode(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_pcg::Pcg64;

    const RATES: [CcRate; 3] = [CcRate::Quarter, CcRate::Third, CcRate::TwoThirds];

    fn taps(g: u8) -> Vec<u8> {
        (0..7).rev().map(|s| (g >> s) & 1).collect()
    }

    #[test]
    fn zero_in_zero_out() {
        for r in RATES {
            let out = ConvCode::new(r).encode(&[0; 40]);
            assert!(out.iter().all(|&b| b == 0));
            assert_eq!(out.len(), ConvCode::new(r).encoded_len(40));
        }
    }

    #[test]
    fn impulse_response_reads_generator_taps() {
        let out = ConvCode::new(CcRate::Third).encode(&[1]);
        assert_eq!(out.len(), 21);
        for (g, &gen) in GENERATORS.iter().enumerate() {
            let stream: Vec<u8> = out.iter().skip(g).step_by(3).copied().collect();
            assert_eq!(stream, taps(gen));
        }
    }

    #[test]
    fn lengths() {
        assert_eq!(ConvCode::new(CcRate::Third).encoded_len(100), 318);
        assert_eq!(ConvCode::new(CcRate::Quarter).encoded_len(100), 424);
        assert_eq!(ConvCode::new(CcRate::TwoThirds).encoded_len(100), 159);
        assert_eq!(ConvCode::new(CcRate::TwoThirds).encoded_len(101), 161);
        for r in RATES {
            let c = ConvCode::new(r);
            for n in 0..50 {
                assert_eq!(c.decoded_len(c.encoded_len(n)), Some(n));
            }
        }
        assert!(matches!(ConvCode::new(CcRate::Third).decode(&[0; 10]), Err(FecError::Size { .. })));
    }

    #[test]
    fn empty_input() {
        for r in RATES {
            assert!(ConvCode::new(r).decode(&[]).unwrap().is_empty());
        }
    }

    #[test]
    fn random_roundtrip_all_rates() {
        let mut rng = Pcg64::seed_from_u64(1);
        for r in RATES {
            let c = ConvCode::new(r);
            for _ in 0..1000 {
                let bits: Vec<u8> = (0..64).map(|_| rng.random_range(0..2)).collect();
                assert_eq!(c.decode(&c.encode(&bits)).unwrap(), bits);
            }
        }
    }

    #[test]
    fn any_single_flip_is_corrected_at_rate_third() {
        let mut rng = Pcg64::seed_from_u64(2);
        let c = ConvCode::new(CcRate::Third);
        let bits: Vec<u8> = (0..64).map(|_| rng.random_range(0..2)).collect();
        let coded = c.encode(&bits);
        for i in 0..coded.len() {
            let mut noisy = coded.clone();
            noisy[i] ^= 1;
            assert_eq!(c.decode(&noisy).unwrap(), bits, "flip at {i}");
        }
    }

    #[test]
    fn double_flips_corrected_at_quarter_rate() {
        let mut rng = Pcg64::seed_from_u64(4);
        let c = ConvCode::new(CcRate::Quarter);
        let bits: Vec<u8> = (0..32).map(|_| rng.random_range(0..2)).collect();
        let coded = c.encode(&bits);
        for _ in 0..500 {
            let mut noisy = coded.clone();
            let i = rng.random_range(0..coded.len());
            let j = rng.random_range(0..coded.len());
            noisy[i] ^= 1;
            noisy[j] ^= 1;
            assert_eq!(c.decode(&noisy).unwrap(), bits);
        }
    }

    #[test]
    fn erasures_carry_no_metric() {
        let c = ConvCode::new(CcRate::Third);
        let bits = vec![1, 0, 1, 1, 0, 0, 1, 0];
        let mut coded = c.encode(&bits);
        for i in (0..coded.len()).step_by(3) {
            coded[i] = ERASED;
        }
        assert_eq!(c.decode(&coded).unwrap(), bits);
    }

    #[test]
    fn free_distance_brute_force() {
        // minimum weight over short nonzero inputs bounds the correction radius
        for (rate, dfree) in [(CcRate::Third, 15), (CcRate::Quarter, 16), (CcRate::TwoThirds, 6)] {
            let c = ConvCode::new(rate);
            let mut min_w = usize::MAX;
            for v in 1u32..(1 << 10) {
                let bits: Vec<u8> = (0..10).map(|i| ((v >> i) & 1) as u8).collect();
                min_w = min_w.min(c.encode(&bits).iter().filter(|&&b| b == 1).count());
            }
            assert!(min_w >= dfree, "rate {rate}: min weight {min_w}");
        }
    }
}
