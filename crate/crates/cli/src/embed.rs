//! Byte messages as elements of Z_p^* for the Ma-Chen scheme.
//!
//! Layout, big-endian: a 16-bit header `0x8000 | len` followed by the
//! message bytes. The set top bit keeps the value non-zero and makes the
//! length unambiguous.

use authenc::GroupParams;
use num_bigint::BigUint;

const HEADER_FLAG: u16 = 0x8000;

/// Largest message, in bytes, that fits under `p`.
pub fn capacity(params: &GroupParams) -> usize {
    let room = params.p_bits().saturating_sub(16);
    // 8 * len must stay strictly below |p| - 16
    (room.saturating_sub(1) / 8) as usize
}

pub fn embed(msg: &[u8], params: &GroupParams) -> Result<BigUint, String> {
    let cap = capacity(params);
    if params.p_bits() <= 16 || msg.len() > cap {
        return Err(format!(
            "message of {} bytes does not fit a {}-bit modulus (limit {} bytes)",
            msg.len(),
            params.p_bits(),
            if params.p_bits() <= 16 { 0 } else { cap }
        ));
    }
    let mut buf = Vec::with_capacity(msg.len() + 2);
    buf.extend_from_slice(&(HEADER_FLAG | msg.len() as u16).to_be_bytes());
    buf.extend_from_slice(msg);
    Ok(BigUint::from_bytes_be(&buf))
}

pub fn extract(value: &BigUint) -> Result<Vec<u8>, String> {
    let bytes = value.to_bytes_be();
    if bytes.len() < 2 || bytes[0] & 0x80 == 0 {
        return Err("decrypted value carries no message header".into());
    }
    let len = (u16::from_be_bytes([bytes[0], bytes[1]]) & !HEADER_FLAG) as usize;
    if bytes.len() != len + 2 {
        return Err("decrypted value has an inconsistent length header".into());
    }
    Ok(bytes[2..].to_vec())
}
