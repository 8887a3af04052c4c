//! Bit-level framing: preamble + 256-bit payload + CRC-16.
//!
//! A frame is 280 bits on the wire: an 8-bit alternating preamble, a
//! zero-padded 256-bit payload and a 16-bit checksum over the payload.
//! All byte<->bit conversions are MSB-first.

use thiserror::Error;

/// Fixed synchronization preamble, transmitted first.
pub const PREAMBLE: [u8; 8] = [1, 0, 1, 0, 1, 0, 1, 0];

/// Payload size carried by every frame, in bits.
pub const PAYLOAD_BITS: usize = 256;

/// Payload size in bytes.
pub const PAYLOAD_BYTES: usize = PAYLOAD_BITS / 8;

/// Serialized frame size in bits: preamble + payload + crc.
pub const FRAME_BITS: usize = 8 + PAYLOAD_BITS + 16;

/// CRC-16/CCITT-FALSE generator polynomial (x^16 + x^12 + x^5 + 1).
pub const CRC16_POLY: u16 = 0x1021;

/// CRC-16/CCITT-FALSE initial register value.
pub const CRC16_INIT: u16 = 0xFFFF;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitframeError {
    #[error("bit value {value} at position {index} is not 0 or 1")]
    InvalidBit { index: usize, value: u8 },
    #[error("payload length {0} bits is not byte-aligned")]
    Alignment(usize),
    #[error("payload is {0} bits, maximum is {PAYLOAD_BITS}")]
    PayloadTooLong(usize),
    #[error("stream is {0} bits, expected exactly {FRAME_BITS}")]
    Length(usize),
    #[error("preamble mismatch, stream is not frame-aligned")]
    Sync,
    #[error("CRC mismatch: computed {computed:#06x}, received {received:#06x}")]
    Integrity {
        computed: u16,
        received: u16,
        /// Payload as received, kept for diagnostics.
        payload: Bitstream,
    },
}

/// An explicit-length sequence of logical bits, stored one bit per byte.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Bitstream {
    bits: Vec<u8>,
}

impl Bitstream {
    pub fn new() -> Self {
        Self { bits: Vec::new() }
    }

    /// Builds a stream from 0/1 values, rejecting anything else.
    pub fn from_bits(bits: &[u8]) -> Result<Self, BitframeError> {
        for (index, &value) in bits.iter().enumerate() {
            if value > 1 {
                return Err(BitframeError::InvalidBit { index, value });
            }
        }
        Ok(Self {
            bits: bits.to_vec(),
        })
    }

    /// Expands bytes into bits, MSB first within each byte.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut bits = Vec::with_capacity(bytes.len() * 8);
        for &b in bytes {
            for shift in (0..8).rev() {
                bits.push((b >> shift) & 1);
            }
        }
        Self { bits }
    }

    /// Packs bits back into bytes, MSB first; the length must be byte-aligned.
    pub fn to_bytes(&self) -> Result<Vec<u8>, BitframeError> {
        if !self.bits.len().is_multiple_of(8) {
            return Err(BitframeError::Alignment(self.bits.len()));
        }
        let mut bytes = Vec::with_capacity(self.bits.len() / 8);
        for chunk in self.bits.chunks(8) {
            let mut b = 0u8;
            for &bit in chunk {
                b = (b << 1) | bit;
            }
            bytes.push(b);
        }
        Ok(bytes)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        self.bits.push(bit & 1);
    }

    pub fn extend(&mut self, other: &Bitstream) {
        self.bits.extend_from_slice(&other.bits);
    }

    /// Flips the bit at `index` in place.
    pub fn flip(&mut self, index: usize) {
        self.bits[index] ^= 1;
    }
}

impl std::ops::Index<usize> for Bitstream {
    type Output = u8;
    fn index(&self, index: usize) -> &u8 {
        &self.bits[index]
    }
}

/// One framed packet: fixed preamble, padded payload, checksum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub preamble: Bitstream,
    pub payload: Bitstream,
    pub crc: Bitstream,
}

/// CRC-16/CCITT-FALSE over a byte-aligned bitstream, as a register value.
pub fn crc16_value(payload: &Bitstream) -> Result<u16, BitframeError> {
    if !payload.len().is_multiple_of(8) {
        return Err(BitframeError::Alignment(payload.len()));
    }
    let mut crc = CRC16_INIT;
    for &bit in payload.bits() {
        let top = ((crc >> 15) as u8) ^ bit;
        crc <<= 1;
        if top != 0 {
            crc ^= CRC16_POLY;
        }
    }
    Ok(crc)
}

/// CRC-16 as a 16-bit stream, MSB first.
pub fn crc16(payload: &Bitstream) -> Result<Bitstream, BitframeError> {
    let value = crc16_value(payload)?;
    Ok(Bitstream::from_bytes(&value.to_be_bytes()))
}

/// Builds a frame around `payload`, zero-padding it to 256 bits.
pub fn build_frame(payload: &Bitstream) -> Result<Frame, BitframeError> {
    if payload.len() > PAYLOAD_BITS {
        return Err(BitframeError::PayloadTooLong(payload.len()));
    }
    let mut padded = payload.clone();
    while padded.len() < PAYLOAD_BITS {
        padded.push(0);
    }
    let crc = crc16(&padded)?;
    Ok(Frame {
        preamble: Bitstream::from_bits(&PREAMBLE).expect("constant preamble"),
        payload: padded,
        crc,
    })
}

/// Serializes a frame to its 280-bit wire form.
pub fn serialize_frame(frame: &Frame) -> Bitstream {
    let mut out = frame.preamble.clone();
    out.extend(&frame.payload);
    out.extend(&frame.crc);
    debug_assert_eq!(out.len(), FRAME_BITS);
    out
}

/// Parses a 280-bit stream back into a frame, checking preamble and CRC.
///
/// Length, sync and integrity failures are distinct errors; an integrity
/// error still carries the received payload.
pub fn parse_frame(stream: &Bitstream) -> Result<Frame, BitframeError> {
    if stream.len() != FRAME_BITS {
        return Err(BitframeError::Length(stream.len()));
    }
    let bits = stream.bits();
    if bits[..8] != PREAMBLE {
        return Err(BitframeError::Sync);
    }
    let payload = Bitstream::from_bits(&bits[8..8 + PAYLOAD_BITS])?;
    let received_crc = &bits[8 + PAYLOAD_BITS..];
    let mut received = 0u16;
    for &bit in received_crc {
        received = (received << 1) | bit as u16;
    }
    let computed = crc16_value(&payload)?;
    if computed != received {
        return Err(BitframeError::Integrity {
            computed,
            received,
            payload,
        });
    }
    Ok(Frame {
        preamble: Bitstream::from_bits(&PREAMBLE).expect("constant preamble"),
        payload,
        crc: Bitstream::from_bytes(&received.to_be_bytes()),
    })
}

/// Splits arbitrary bytes into 32-byte framed chunks, zero-padding the last.
pub fn fragment(data: &[u8]) -> Vec<Frame> {
    data.chunks(PAYLOAD_BYTES)
        .map(|chunk| {
            let mut padded = chunk.to_vec();
            padded.resize(PAYLOAD_BYTES, 0);
            build_frame(&Bitstream::from_bytes(&padded)).expect("chunk fits one payload")
        })
        .collect()
}

/// Concatenates frame payloads and truncates to the original length.
///
/// Frame payloads carry no length field, so the caller supplies it.
pub fn defragment(frames: &[Frame], len: usize) -> Result<Vec<u8>, BitframeError> {
    let mut bytes = Vec::with_capacity(frames.len() * PAYLOAD_BYTES);
    for frame in frames {
        bytes.extend_from_slice(&frame.payload.to_bytes()?);
    }
    bytes.truncate(len);
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent CRC oracle: schoolbook polynomial long division over the
    /// zero-augmented message, with the initial register value XORed into the
    /// leading 16 bits. Kept deliberately separate from the shift-register
    /// implementation above.
    #[allow(clippy::needless_range_loop)]
    fn crc16_long_division(payload: &[u8]) -> u16 {
        let mut augmented: Vec<u8> = payload.to_vec();
        augmented.extend_from_slice(&[0u8; 16]);
        for i in 0..16 {
            augmented[i] ^= ((CRC16_INIT >> (15 - i)) & 1) as u8;
        }
        // Divisor bits of x^16 + x^12 + x^5 + 1.
        let divisor: [u8; 17] = [1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1];
        for i in 0..payload.len() {
            if augmented[i] == 1 {
                for (j, &d) in divisor.iter().enumerate() {
                    augmented[i + j] ^= d;
                }
            }
        }
        let mut remainder = 0u16;
        for &bit in &augmented[payload.len()..] {
            remainder = (remainder << 1) | bit as u16;
        }
        remainder
    }

    fn random_payload(rng: &mut ChaCha8Rng, bits: usize) -> Bitstream {
        let mut s = Bitstream::new();
        for _ in 0..bits {
            s.push(rng.gen_range(0..=1));
        }
        s
    }

    #[test]
    fn crc_known_check_value() {
        // The published check value for this CRC variant.
        let ascii = Bitstream::from_bytes(b"123456789");
        assert_eq!(crc16_long_division(ascii.bits()), 0x29B1);
        assert_eq!(crc16_value(&ascii).unwrap(), 0x29B1);
    }

    #[test]
    fn crc_zero_payload() {
        let zeros = Bitstream::from_bits(&[0; 256]).unwrap();
        let oracle = crc16_long_division(zeros.bits());
        assert_eq!(oracle, 0xF14C);
        assert_eq!(crc16_value(&zeros).unwrap(), oracle);
    }

    #[test]
    fn crc_matches_long_division_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n_bytes = rng.gen_range(0..=32usize);
            let payload = random_payload(&mut rng, n_bytes * 8);
            assert_eq!(
                crc16_value(&payload).unwrap(),
                crc16_long_division(payload.bits())
            );
        }
    }

    #[test]
    fn crc_rejects_unaligned_payload() {
        let payload = Bitstream::from_bits(&[1, 0, 1]).unwrap();
        assert_eq!(crc16_value(&payload), Err(BitframeError::Alignment(3)));
    }

    #[test]
    fn crc_detects_single_bit_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let payload = random_payload(&mut rng, 256);
        let original = crc16_value(&payload).unwrap();
        for i in 0..payload.len() {
            let mut corrupted = payload.clone();
            corrupted.flip(i);
            assert_ne!(crc16_value(&corrupted).unwrap(), original, "flip at {i}");
        }
    }

    #[test]
    fn build_frame_pads_and_checksums() {
        let frame = build_frame(&Bitstream::new()).unwrap();
        assert_eq!(frame.payload.len(), 256);
        assert!(frame.payload.bits().iter().all(|&b| b == 0));
        assert_eq!(
            frame.crc,
            crc16(&Bitstream::from_bits(&[0; 256]).unwrap()).unwrap()
        );
    }

    #[test]
    fn build_frame_rejects_oversized_payload() {
        let payload = Bitstream::from_bits(&vec![0u8; 260]).unwrap();
        assert_eq!(
            build_frame(&payload),
            Err(BitframeError::PayloadTooLong(260))
        );
    }

    #[test]
    fn serialized_layout_is_preamble_payload_crc() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let payload = random_payload(&mut rng, 256);
        let frame = build_frame(&payload).unwrap();
        let wire = serialize_frame(&frame);
        assert_eq!(wire.len(), 280);
        assert_eq!(&wire.bits()[..8], &PREAMBLE);
        assert_eq!(&wire.bits()[8..264], payload.bits());
        assert_eq!(&wire.bits()[264..], frame.crc.bits());
    }

    #[test]
    fn parse_inverts_serialize() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let n = rng.gen_range(0..=256usize);
            let payload = random_payload(&mut rng, n);
            let frame = build_frame(&payload).unwrap();
            let parsed = parse_frame(&serialize_frame(&frame)).unwrap();
            assert_eq!(parsed, frame);
            assert_eq!(&parsed.payload.bits()[..n], payload.bits());
        }
    }

    #[test]
    fn parse_reports_flipped_payload_bit_as_integrity_error() {
        let frame = build_frame(&Bitstream::from_bytes(&[0xAB; 32])).unwrap();
        let mut wire = serialize_frame(&frame);
        wire.flip(100);
        match parse_frame(&wire) {
            Err(BitframeError::Integrity { payload, .. }) => {
                // The damaged payload is still available for diagnostics.
                assert_eq!(payload.len(), 256);
            }
            other => panic!("expected integrity error, got {other:?}"),
        }
    }

    #[test]
    fn parse_reports_bad_preamble_as_sync_error() {
        let frame = build_frame(&Bitstream::new()).unwrap();
        let mut wire = serialize_frame(&frame);
        // Turn 10101010 into 11111111.
        for i in [1, 3, 5, 7] {
            wire.flip(i);
        }
        assert_eq!(parse_frame(&wire), Err(BitframeError::Sync));
    }

    #[test]
    fn parse_rejects_wrong_length() {
        let stream = Bitstream::from_bits(&vec![0u8; 279]).unwrap();
        assert_eq!(parse_frame(&stream), Err(BitframeError::Length(279)));
    }

    #[test]
    fn fragment_chunks_and_pads() {
        assert_eq!(fragment(&[]).len(), 0);
        assert_eq!(fragment(&[0x55; 32]).len(), 1);
        let frames = fragment(&[0x55; 33]);
        assert_eq!(frames.len(), 2);
        let second = frames[1].payload.to_bytes().unwrap();
        assert_eq!(second[0], 0x55);
        assert!(second[1..].iter().all(|&b| b == 0));
    }

    #[test]
    fn fragment_roundtrip_recovers_bytes() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for len in [0usize, 1, 31, 32, 33, 64, 100] {
            let data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let frames = fragment(&data);
            assert_eq!(frames.len(), len.div_ceil(32));
            assert_eq!(defragment(&frames, len).unwrap(), data);
        }
    }
}
