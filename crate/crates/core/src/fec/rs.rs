//! Reed-Solomon RS(15, k) over GF(16).
//!
//! Codewords are systematic: the k message symbols come first, followed by
//! 15 - k parity symbols. Index 0 holds the highest-degree coefficient. The
//! generator polynomial has roots alpha^1 .. alpha^(15-k).
//!
//! Decoding computes syndromes, runs Berlekamp-Massey for the error locator,
//! finds error positions with a Chien search and error values with Forney's
//! formula.

use super::gf16::Gf16;
use super::FecError;

pub const RS_N: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsCode {
    k: usize,
    /// Generator coefficients, highest degree first, monic.
    generator: Vec<Gf16>,
}

/// Result of a successful decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsDecoded {
    pub message: Vec<Gf16>,
    pub corrected: usize,
}

impl RsCode {
    /// Builds RS(15, k). The PHY uses k in {2, 4, 7, 11}, but any 1 <= k < 15
    /// is a valid code.
    pub fn new(k: usize) -> Result<Self, FecError> {
        if k == 0 || k >= RS_N {
            return Err(FecError::InvalidCode(format!("RS(15,{k})")));
        }
        // g(x) = prod (x - alpha^i), i = 1..=n-k, highest degree first
        let mut g = vec![Gf16::ONE];
        for i in 1..=(RS_N - k) as i32 {
            let root = Gf16::alpha_pow(i);
            let mut next = vec![Gf16::ZERO; g.len() + 1];
            for (j, &c) in g.iter().enumerate() {
                next[j] = next[j] + c;
                next[j + 1] = next[j + 1] + c * root;
            }
            g = next;
        }
        Ok(RsCode { k, generator: g })
    }

    pub fn n(&self) -> usize {
        RS_N
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parity_len(&self) -> usize {
        RS_N - self.k
    }

    /// Correctable symbol errors.
    pub fn t(&self) -> usize {
        (RS_N - self.k) / 2
    }

    pub fn generator(&self) -> &[Gf16] {
        &self.generator
    }

    pub fn encode(&self, msg: &[Gf16]) -> Result<[Gf16; RS_N], FecError> {
        if msg.len() != self.k {
            return Err(FecError::Size { expected: self.k, got: msg.len() });
        }
        let p = self.parity_len();
        let mut word = [Gf16::ZERO; RS_N];
        word[..self.k].copy_from_slice(msg);
        // remainder of m(x) x^p divided by g(x), LFSR form
        let mut rem = vec![Gf16::ZERO; p];
        for &m in msg {
            let fb = m + rem[0];
            for j in 0..p - 1 {
                rem[j] = rem[j + 1] + fb * self.generator[j + 1];
            }
            rem[p - 1] = fb * self.generator[p];
        }
        word[self.k..].copy_from_slice(&rem);
        Ok(word)
    }

    /// Syndromes S_1 .. S_(n-k): the received word evaluated at each root.
    pub fn syndromes(&self, word: &[Gf16]) -> Vec<Gf16> {
        (1..=self.parity_len() as i32)
            .map(|i| eval_high_first(word, Gf16::alpha_pow(i)))
            .collect()
    }

    pub fn decode(&self, word: &[Gf16]) -> Result<RsDecoded, FecError> {
        if word.len() != RS_N {
            return Err(FecError::Size { expected: RS_N, got: word.len() });
        }
        let synd = self.syndromes(word);
        if synd.iter().all(|&s| s == Gf16::ZERO) {
            return Ok(RsDecoded { message: word[..self.k].to_vec(), corrected: 0 });
        }

        let locator = berlekamp_massey(&synd).ok_or(FecError::Uncorrectable)?;
        let degree = locator.len() - 1;
        if degree == 0 || degree > self.t() {
            return Err(FecError::Uncorrectable);
        }

        // Chien search. Position i holds the coefficient of x^(14-i); an error
        // there has locator X = alpha^(14-i) and Lambda(X^-1) = 0.
        let positions: Vec<usize> = (0..RS_N)
            .filter(|&i| eval_low_first(&locator, Gf16::alpha_pow(-((RS_N - 1 - i) as i32))) == Gf16::ZERO)
            .collect();
        if positions.len() != degree {
            return Err(FecError::Uncorrectable);
        }

        // Omega(x) = S(x) Lambda(x) mod x^(n-k), S(x) = sum S_(j+1) x^j
        let p = self.parity_len();
        let mut omega = vec![Gf16::ZERO; p];
        for (i, &l) in locator.iter().enumerate() {
            for (j, &s) in synd.iter().enumerate() {
                if i + j < p {
                    omega[i + j] = omega[i + j] + l * s;
                }
            }
        }
        // formal derivative: odd-power terms survive in characteristic 2
        let deriv: Vec<Gf16> = locator
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| if i % 2 == 1 { c } else { Gf16::ZERO })
            .collect();

        let mut fixed = word.to_vec();
        for &pos in &positions {
            let x_inv = Gf16::alpha_pow(-((RS_N - 1 - pos) as i32));
            let denom = eval_low_first(&deriv, x_inv);
            if denom == Gf16::ZERO {
                return Err(FecError::Uncorrectable);
            }
            // first consecutive root is alpha^1, so the X^(1-fcr) factor is 1
            let magnitude = eval_low_first(&omega, x_inv) / denom;
            fixed[pos] = fixed[pos] + magnitude;
        }
        if self.syndromes(&fixed).iter().any(|&s| s != Gf16::ZERO) {
            return Err(FecError::Uncorrectable);
        }
        Ok(RsDecoded { message: fixed[..self.k].to_vec(), corrected: degree })
    }
}

/// Error-locator polynomial, lowest degree first, trimmed to its degree.
fn berlekamp_massey(synd: &[Gf16]) -> Option<Vec<Gf16>> {
    let n = synd.len();
    let mut c = vec![Gf16::ZERO; n + 1];
    let mut b = vec![Gf16::ZERO; n + 1];
    c[0] = Gf16::ONE;
    b[0] = Gf16::ONE;
    let mut l = 0usize;
    let mut m = 1usize;
    let mut last_d = Gf16::ONE;
    for k in 0..n {
        let mut d = synd[k];
        for i in 1..=l {
            d = d + c[i] * synd[k - i];
        }
        if d == Gf16::ZERO {
            m += 1;
            continue;
        }
        let coef = d / last_d;
        let prev = c.clone();
        for i in 0..=n - m {
            c[i + m] = c[i + m] + coef * b[i];
        }
        if 2 * l <= k {
            l = k + 1 - l;
            b = prev;
            last_d = d;
            m = 1;
        } else {
            m += 1;
        }
    }
    let mut deg = n;
    while deg > 0 && c[deg] == Gf16::ZERO {
        deg -= 1;
    }
    // a locator whose degree disagrees with the LFSR length cannot be trusted
    if deg != l {
        return None;
    }
    c.truncate(deg + 1);
    Some(c)
}

fn eval_high_first(poly: &[Gf16], x: Gf16) -> Gf16 {
    poly.iter().fold(Gf16::ZERO, |acc, &c| acc * x + c)
}

fn eval_low_first(poly: &[Gf16], x: Gf16) -> Gf16 {
    poly.iter().rev().fold(Gf16::ZERO, |acc, &c| acc * x + c)
}

/// Splits bytes into nibbles, high nibble first.
pub fn bytes_to_nibbles(bytes: &[u8]) -> Vec<Gf16> {
    bytes.iter().flat_map(|&b| [Gf16::new(b >> 4), Gf16::new(b)]).collect()
}

/// Packs nibbles into bytes, high nibble first. An odd trailing nibble is
/// dropped.
pub fn nibbles_to_bytes(nibbles: &[Gf16]) -> Vec<u8> {
    nibbles.chunks_exact(2).map(|p| (p[0].value() << 4) | p[1].value()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_pcg::Pcg64;

    fn syms(v: &[u8]) -> Vec<Gf16> {
        v.iter().map(|&x| Gf16::new(x)).collect()
    }

    #[test]
    fn parameters() {
        for (k, t) in [(2, 6), (4, 5), (7, 4), (11, 2)] {
            let c = RsCode::new(k).unwrap();
            assert_eq!(c.t(), t);
            assert_eq!(c.generator().len(), 15 - k + 1);
        }
        assert!(RsCode::new(15).is_err());
        assert!(RsCode::new(0).is_err());
    }

    #[test]
    fn generator_has_expected_roots() {
        let c = RsCode::new(7).unwrap();
        for i in 1..=8 {
            assert_eq!(eval_high_first(c.generator(), Gf16::alpha_pow(i)), Gf16::ZERO);
        }
        assert_ne!(eval_high_first(c.generator(), Gf16::alpha_pow(9)), Gf16::ZERO);
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let c = RsCode::new(11).unwrap();
        assert_eq!(c.encode(&[Gf16::ZERO; 11]).unwrap(), [Gf16::ZERO; 15]);
    }

    #[test]
    fn wrong_lengths() {
        let c = RsCode::new(11).unwrap();
        assert_eq!(c.encode(&[Gf16::ZERO; 10]), Err(FecError::Size { expected: 11, got: 10 }));
        assert!(matches!(c.decode(&[Gf16::ZERO; 14]), Err(FecError::Size { .. })));
    }

    #[test]
    fn codeword_is_multiple_of_generator() {
        let mut rng = Pcg64::seed_from_u64(5);
        for k in [2, 4, 7, 11] {
            let c = RsCode::new(k).unwrap();
            for _ in 0..50 {
                let msg: Vec<Gf16> = (0..k).map(|_| Gf16::new(rng.random())).collect();
                let cw = c.encode(&msg).unwrap();
                assert!(c.syndromes(&cw).iter().all(|&s| s == Gf16::ZERO));
                assert_eq!(&cw[..k], &msg[..]);
            }
        }
    }

    #[test]
    fn random_roundtrip_and_correction() {
        let mut rng = Pcg64::seed_from_u64(11);
        for k in [2, 4, 7, 11] {
            let c = RsCode::new(k).unwrap();
            for _ in 0..1000 {
                let msg: Vec<Gf16> = (0..k).map(|_| Gf16::new(rng.random())).collect();
                let mut cw = c.encode(&msg).unwrap().to_vec();
                assert_eq!(c.decode(&cw).unwrap(), RsDecoded { message: msg.clone(), corrected: 0 });
                let errs = rng.random_range(1..=c.t());
                let mut pos: Vec<usize> = (0..15).collect();
                for i in 0..errs {
                    let j = rng.random_range(i..15);
                    pos.swap(i, j);
                    cw[pos[i]] = cw[pos[i]] + Gf16::new(rng.random_range(1..16));
                }
                let d = c.decode(&cw).unwrap();
                assert_eq!(d.message, msg);
                assert_eq!(d.corrected, errs);
            }
        }
    }

    #[test]
    fn three_errors_never_claim_clean() {
        let c = RsCode::new(11).unwrap();
        let msg = syms(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11]);
        let cw = c.encode(&msg).unwrap();
        let mut rng = Pcg64::seed_from_u64(3);
        for _ in 0..2000 {
            let mut w = cw.to_vec();
            let mut pos: Vec<usize> = (0..15).collect();
            for i in 0..3 {
                let j = rng.random_range(i..15);
                pos.swap(i, j);
                w[pos[i]] = w[pos[i]] + Gf16::new(rng.random_range(1..16));
            }
            match c.decode(&w) {
                Err(FecError::Uncorrectable) => {}
                Ok(d) => {
                    assert_ne!(d.corrected, 0);
                    assert_ne!(d.message, msg, "3 errors cannot decode back to the sent word");
                }
                Err(e) => panic!("unexpected {e}"),
            }
        }
    }

    #[test]
    fn minimum_distance_sampled() {
        let mut rng = Pcg64::seed_from_u64(21);
        for k in [2, 4, 7, 11] {
            let c = RsCode::new(k).unwrap();
            for _ in 0..300 {
                let a: Vec<Gf16> = (0..k).map(|_| Gf16::new(rng.random())).collect();
                let mut b = a.clone();
                let i = rng.random_range(0..k);
                b[i] = b[i] + Gf16::new(rng.random_range(1..16));
                let ca = c.encode(&a).unwrap();
                let cb = c.encode(&b).unwrap();
                let dist = ca.iter().zip(cb.iter()).filter(|(x, y)| x != y).count();
                assert!(dist > 15 - k);
            }
        }
    }

    #[test]
    fn nibble_packing() {
        let n = bytes_to_nibbles(&[0xab, 0x01]);
        assert_eq!(n, syms(&[0xa, 0xb, 0x0, 0x1]));
        assert_eq!(nibbles_to_bytes(&n), vec![0xab, 0x01]);
    }
}
