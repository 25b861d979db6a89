//! Channel-noise estimation from the error-corrected phases of the protocol.
//!
//! The initialization and termination messages are sent through a block code.
//! As long as the channel flips at most `t_c = ⌊(d_min−1)/2⌋` symbols, the
//! decoder recovers the message and the distance to the decoded codeword is
//! the true number of flips, which gives an unbiased estimate of `ω`.

use rand::Rng;

use crate::channel::ChannelModel;
use crate::error::{Error, Result};
use crate::loss::ErrorRateBounds;

/// Binary symbols, one per byte with values 0 or 1.
pub type Bits = Vec<u8>;

pub fn hamming_distance(a: &[u8], b: &[u8]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

pub trait BlockCode {
    fn message_len(&self) -> usize;
    fn codeword_len(&self) -> usize;
    fn min_distance(&self) -> usize;

    /// `⌊(d_min − 1)/2⌋`.
    fn correction_radius(&self) -> usize {
        self.min_distance().saturating_sub(1) / 2
    }
}

/// A code with an explicit encoder, small enough to enumerate.
pub trait Encoder: BlockCode {
    fn encode(&self, message: &[u8]) -> Bits;
}

/// Every message bit is sent `repeats` times in a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepetitionCode {
    message_len: usize,
    repeats: usize,
}

impl RepetitionCode {
    pub fn new(message_len: usize, repeats: usize) -> Result<Self> {
        if message_len == 0 || repeats < 2 {
            return Err(Error::InvalidArgument(format!(
                "repetition code needs a non-empty message and at least 2 repeats, got m = {message_len}, r = {repeats}"
            )));
        }
        Ok(Self { message_len, repeats })
    }

    /// The `m`-bit to `3m`-bit code.
    pub fn triple(message_len: usize) -> Result<Self> {
        Self::new(message_len, 3)
    }
}

impl BlockCode for RepetitionCode {
    fn message_len(&self) -> usize {
        self.message_len
    }

    fn codeword_len(&self) -> usize {
        self.message_len * self.repeats
    }

    fn min_distance(&self) -> usize {
        self.repeats
    }
}

impl Encoder for RepetitionCode {
    fn encode(&self, message: &[u8]) -> Bits {
        message
            .iter()
            .flat_map(|&b| std::iter::repeat_n(b, self.repeats))
            .collect()
    }
}

/// Stand-in for a long code that is never decoded symbol by symbol.
///
/// Simulations only need the flip count and whether it exceeds the correction
/// radius, so the code is described by its length and minimum distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransparentCode {
    codeword_len: usize,
    min_distance: usize,
}

impl TransparentCode {
    pub fn new(codeword_len: usize, min_distance: usize) -> Result<Self> {
        if codeword_len == 0 || min_distance == 0 || min_distance > codeword_len {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= d_min <= k, got k = {codeword_len}, d_min = {min_distance}"
            )));
        }
        Ok(Self {
            codeword_len,
            min_distance,
        })
    }

    /// A code of length `k` that corrects up to `correction_radius` flips.
    pub fn with_correction_radius(codeword_len: usize, correction_radius: usize) -> Result<Self> {
        Self::new(codeword_len, 2 * correction_radius + 1)
    }

    /// Default used by the experiments: corrects up to `⌊k/3⌋` flips, so
    /// decoding only fails once the noise approaches the level where the
    /// rapid-bit phase is useless anyway.
    pub fn for_length(codeword_len: usize) -> Result<Self> {
        Self::with_correction_radius(codeword_len, codeword_len / 3)
    }
}

impl BlockCode for TransparentCode {
    fn message_len(&self) -> usize {
        // Only the codeword length matters here; report the largest message a
        // code with this distance could carry by the Singleton bound.
        self.codeword_len + 1 - self.min_distance
    }

    fn codeword_len(&self) -> usize {
        self.codeword_len
    }

    fn min_distance(&self) -> usize {
        self.min_distance
    }
}

const MAX_ENUMERATED_MESSAGE_BITS: usize = 20;

fn message_from_index(index: u64, len: usize) -> Bits {
    // most significant bit first, so index order is lexicographic order
    (0..len).map(|i| ((index >> (len - 1 - i)) & 1) as u8).collect()
}

fn check_enumerable(code: &impl Encoder) -> Result<()> {
    if code.message_len() > MAX_ENUMERATED_MESSAGE_BITS {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search limited to {MAX_ENUMERATED_MESSAGE_BITS}-bit messages, code has {}",
            code.message_len()
        )));
    }
    Ok(())
}

/// Minimum pairwise Hamming distance over all distinct codewords.
pub fn min_distance_exhaustive(code: &impl Encoder) -> Result<usize> {
    check_enumerable(code)?;
    let m = code.message_len();
    let words: Vec<Bits> = (0..1u64 << m).map(|i| code.encode(&message_from_index(i, m))).collect();
    let mut best = usize::MAX;
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            best = best.min(hamming_distance(a, b)?);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub message: Bits,
    /// `θ̂`, the distance from the received word to the decoded codeword.
    pub distance: usize,
}

/// Nearest-codeword decoding by exhaustive search; ties go to the
/// lexicographically smallest message.
pub fn decode_nearest(code: &impl Encoder, received: &[u8]) -> Result<Decoded> {
    check_enumerable(code)?;
    if received.len() != code.codeword_len() {
        return Err(Error::LengthMismatch {
            left: received.len(),
            right: code.codeword_len(),
        });
    }
    let m = code.message_len();
    let mut best: Option<Decoded> = None;
    for i in 0..1u64 << m {
        let message = message_from_index(i, m);
        let distance = hamming_distance(&code.encode(&message), received)?;
        if best.as_ref().is_none_or(|b| distance < b.distance) {
            best = Some(Decoded { message, distance });
        }
    }
    Ok(best.expect("at least one message"))
}

/// Sends `codeword` through the channel, flipping each symbol independently.
pub fn transmit<R: Rng + ?Sized>(channel: &ChannelModel, codeword: &[u8], rng: &mut R) -> Bits {
    codeword
        .iter()
        .map(|&b| if rng.gen_bool(channel.noise()) { b ^ 1 } else { b })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodedPhase {
    /// True number of flipped symbols `θ`.
    pub flips: usize,
    /// Decoding fails (and the protocol with it) when `θ > t_c`.
    pub aborted: bool,
}

impl CodedPhase {
    /// The decoder's error count `θ̂`, available when decoding succeeded.
    pub fn observed_errors(&self) -> Option<usize> {
        (!self.aborted).then_some(self.flips)
    }
}

/// Flips each of the `k` codeword symbols with probability `ω`.
pub fn simulate_coded_phase<R: Rng + ?Sized>(channel: &ChannelModel, code: &impl BlockCode, rng: &mut R) -> CodedPhase {
    let flips = (0..code.codeword_len())
        .filter(|_| rng.gen_bool(channel.noise()))
        .count();
    CodedPhase {
        flips,
        aborted: flips > code.correction_radius(),
    }
}

/// Empirical noise rate `ω̂ = θ̂/k` with a two-sided Hoeffding interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseEstimate {
    pub observed_errors: usize,
    pub codeword_len: usize,
    pub point: f64,
    pub confidence: f64,
    /// `√(ln(2/δ)/(2k))`: `|ω̂ − ω|` exceeds this with probability at most `δ`.
    pub half_width: f64,
}

impl NoiseEstimate {
    fn log_term(&self) -> f64 {
        (2.0 / self.confidence).ln()
    }
}

pub fn estimate_noise(observed_errors: usize, codeword_len: usize, confidence: f64) -> Result<NoiseEstimate> {
    if codeword_len == 0 {
        return Err(Error::InvalidArgument("codeword length must be at least 1".into()));
    }
    if observed_errors > codeword_len {
        return Err(Error::InvalidArgument(format!(
            "observed errors {observed_errors} exceed codeword length {codeword_len}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1), got {confidence}"
        )));
    }
    let k = codeword_len as f64;
    Ok(NoiseEstimate {
        observed_errors,
        codeword_len,
        point: observed_errors as f64 / k,
        confidence,
        half_width: ((2.0 / confidence).ln() / (2.0 * k)).sqrt(),
    })
}

/// Rate bounds that hold with probability `1 − δ`:
/// `pₐ = (1+ω̂)/2 + √(ln(2/δ)/(8k))`, `pᵤ = 2ω̂ − √(2 ln(2/δ)/k)`,
/// clamped to `[0, 1]`.
pub fn high_probability_rates(estimate: &NoiseEstimate) -> Result<ErrorRateBounds> {
    let k = estimate.codeword_len as f64;
    let log_term = estimate.log_term();
    let attacker = (0.5 * (1.0 + estimate.point) + (log_term / (8.0 * k)).sqrt()).min(1.0);
    let user = (2.0 * estimate.point - (2.0 * log_term / k).sqrt()).max(0.0);
    ErrorRateBounds::new(attacker, user)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::trial_rng;

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&[0, 0, 0], &[0, 0, 0]).unwrap(), 0);
        assert_eq!(hamming_distance(&[0, 0, 0], &[1, 1, 1]).unwrap(), 3);
        assert_eq!(hamming_distance(&[1, 0, 1, 1, 0], &[1, 1, 1, 0, 0]).unwrap(), 2);
        assert!(matches!(
            hamming_distance(&[0, 1], &[0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn repetition_code_distance() {
        for m in 1..=4 {
            let code = RepetitionCode::triple(m).unwrap();
            assert_eq!(min_distance_exhaustive(&code).unwrap(), code.min_distance());
            assert_eq!(code.correction_radius(), 1);
        }
        let five = RepetitionCode::new(2, 5).unwrap();
        assert_eq!(min_distance_exhaustive(&five).unwrap(), 5);
        assert_eq!(five.correction_radius(), 2);
        assert!(RepetitionCode::new(0, 3).is_err());
        assert!(RepetitionCode::new(2, 1).is_err());
    }

    #[test]
    fn decode_single_repetition() {
        let code = RepetitionCode::triple(1).unwrap();
        let d = decode_nearest(&code, &[0, 1, 0]).unwrap();
        assert_eq!(
            d,
            Decoded {
                message: vec![0],
                distance: 1
            }
        );
        let d = decode_nearest(&code, &[1, 1, 1]).unwrap();
        assert_eq!(
            d,
            Decoded {
                message: vec![1],
                distance: 0
            }
        );
        assert!(decode_nearest(&code, &[1, 1]).is_err());
    }

    #[test]
    fn decode_matches_enumeration_over_all_words() {
        let code = RepetitionCode::triple(1).unwrap();
        for word in 0u8..8 {
            let received: Vec<u8> = (0..3).map(|i| (word >> (2 - i)) & 1).collect();
            let ones = received.iter().filter(|&&b| b == 1).count();
            let (msg, dist) = if ones >= 2 { (1, 3 - ones) } else { (0, ones) };
            let d = decode_nearest(&code, &received).unwrap();
            assert_eq!(d.message, vec![msg]);
            assert_eq!(d.distance, dist);
        }
    }

    #[test]
    fn ties_go_to_smallest_message() {
        // With two repeats, 01 is equidistant from 00 and 11.
        let code = RepetitionCode::new(1, 2).unwrap();
        assert_eq!(decode_nearest(&code, &[0, 1]).unwrap().message, vec![0]);
        assert_eq!(decode_nearest(&code, &[1, 0]).unwrap().message, vec![0]);
    }

    #[test]
    fn recovers_message_and_flip_count_within_radius() {
        for m in 1..=4usize {
            let code = RepetitionCode::triple(m).unwrap();
            let k = code.codeword_len();
            for idx in 0..1u64 << m {
                let message = message_from_index(idx, m);
                let sent = code.encode(&message);
                // every single flip, and no flip
                for flip in 0..=k {
                    let mut received = sent.clone();
                    let flips = if flip < k {
                        received[flip] ^= 1;
                        1
                    } else {
                        0
                    };
                    let d = decode_nearest(&code, &received).unwrap();
                    assert_eq!(d.message, message);
                    assert_eq!(d.distance, flips);
                }
            }
        }
        // radius 2: every pair of flips in distinct blocks or in the same block
        let code = RepetitionCode::new(2, 5).unwrap();
        let sent = code.encode(&[1, 0]);
        for i in 0..10 {
            for j in i + 1..10 {
                let mut received = sent.clone();
                received[i] ^= 1;
                received[j] ^= 1;
                let d = decode_nearest(&code, &received).unwrap();
                assert_eq!(d.message, vec![1, 0]);
                assert_eq!(d.distance, 2);
            }
        }
    }

    #[test]
    fn channel_transmission_through_real_code() {
        let code = RepetitionCode::triple(4).unwrap();
        let ch = ChannelModel::new(0.05).unwrap();
        let message = vec![1, 0, 1, 1];
        let sent = code.encode(&message);
        for trial in 0..500 {
            let mut rng = trial_rng(9, 0, trial);
            let received = transmit(&ch, &sent, &mut rng);
            let flips = hamming_distance(&sent, &received).unwrap();
            let d = decode_nearest(&code, &received).unwrap();
            if flips <= code.correction_radius() {
                assert_eq!(d.message, message);
                assert_eq!(d.distance, flips);
            }
        }
    }

    #[test]
    fn coded_phase_edges() {
        let mut rng = trial_rng(0, 0, 0);
        let code = TransparentCode::for_length(1024).unwrap();
        let quiet = simulate_coded_phase(&ChannelModel::new(0.0).unwrap(), &code, &mut rng);
        assert_eq!(
            quiet,
            CodedPhase {
                flips: 0,
                aborted: false
            }
        );
        let rep = RepetitionCode::triple(1).unwrap();
        let loud = simulate_coded_phase(&ChannelModel::new(1.0).unwrap(), &rep, &mut rng);
        assert_eq!(
            loud,
            CodedPhase {
                flips: 3,
                aborted: true
            }
        );
        assert_eq!(loud.observed_errors(), None);
    }

    #[test]
    fn transparent_code_parameters() {
        let code = TransparentCode::for_length(1024).unwrap();
        assert_eq!(code.correction_radius(), 341);
        assert_eq!(code.codeword_len(), 1024);
        assert!(TransparentCode::new(10, 11).is_err());
        assert!(TransparentCode::new(0, 1).is_err());
    }

    #[test]
    fn estimate_reference_values() {
        let est = estimate_noise(102, 1024, 0.01).unwrap();
        assert!((est.point - 0.099_609_375).abs() < 1e-15);
        assert!((est.half_width - 0.050_863_238_459_960_29).abs() < 1e-12);
        assert_eq!(estimate_noise(0, 77, 0.2).unwrap().point, 0.0);
        assert!(estimate_noise(3, 10, 0.0).is_err());
        assert!(estimate_noise(3, 10, 1.0).is_err());
        assert!(estimate_noise(11, 10, 0.5).is_err());
    }

    #[test]
    fn high_probability_reference_values() {
        let est = NoiseEstimate {
            observed_errors: 0,
            codeword_len: 1024,
            point: 0.1,
            confidence: 0.01,
            half_width: 0.0,
        };
        let r = high_probability_rates(&est).unwrap();
        assert!((r.attacker_floor() - 0.575_431_619_229_980_1).abs() < 1e-12);
        assert!((r.user_ceiling() - 0.098_273_523_080_079_42).abs() < 1e-12);
    }

    #[test]
    fn high_probability_clamps_user_at_zero() {
        let est = estimate_noise(5, 1024, 0.1).unwrap();
        let r = high_probability_rates(&est).unwrap();
        assert_eq!(r.user_ceiling(), 0.0);
    }

    #[test]
    fn high_probability_widths_shrink_toward_ln2_floor() {
        let est = estimate_noise(100, 1024, 0.999_999).unwrap();
        let r = high_probability_rates(&est).unwrap();
        let w = est.point;
        let floor_a = (2f64.ln() / 8192.0).sqrt();
        let floor_u = (2.0 * 2f64.ln() / 1024.0).sqrt();
        assert!((r.attacker_floor() - ((1.0 + w) / 2.0 + floor_a)).abs() < 1e-6);
        assert!((r.user_ceiling() - (2.0 * w - floor_u)).abs() < 1e-6);
    }

    #[test]
    fn high_probability_gap_collapse() {
        // ω̂ = 0.45 puts 2ω̂ − width well above (1+ω̂)/2 + width
        let est = estimate_noise(461, 1024, 0.5).unwrap();
        assert!(matches!(high_probability_rates(&est), Err(Error::GapCollapse { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn half_width_monotone(k in 1usize..5000, dk in 1usize..500, d in 0.001f64..0.9, dd in 0.001f64..0.09) {
                let a = estimate_noise(0, k, d).unwrap().half_width;
                prop_assert!(estimate_noise(0, k + dk, d).unwrap().half_width < a);
                prop_assert!(estimate_noise(0, k, d + dd).unwrap().half_width < a);
            }

            #[test]
            fn high_probability_widens_plugin(k in 16usize..4096, frac in 0.0f64..0.3, d in 0.001f64..0.5) {
                let theta = (frac * k as f64).floor() as usize;
                let est = estimate_noise(theta, k, d).unwrap();
                if let Ok(r) = high_probability_rates(&est) {
                    prop_assert!(r.attacker_floor() >= (1.0 + est.point) / 2.0);
                    prop_assert!(r.user_ceiling() <= 2.0 * est.point);
                }
            }
        }
    }
}
