//! The pairing function used everywhere a pair is coded as one natural.
//!
//! Fixed choice: the Cantor pairing `⟨x,y⟩ = (x+y)(x+y+1)/2 + y`. It is a
//! bijection `ω² → ω`, and both directions are cheap.

/// Encode a pair as a single natural. Panics on overflow (desk-scale inputs
/// never get close).
pub fn encode(x: u64, y: u64) -> u64 {
    let s = x as u128 + y as u128;
    let code = s * (s + 1) / 2 + y as u128;
    u64::try_from(code).expect("pair code exceeds u64")
}

/// Decode a natural back into the pair it encodes.
pub fn decode(n: u64) -> (u64, u64) {
    // Largest w with w(w+1)/2 <= n.
    let mut w = (((8.0 * n as f64 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    while tri(w + 1) <= n as u128 {
        w += 1;
    }
    while tri(w) > n as u128 {
        w -= 1;
    }
    let y = n - tri(w) as u64;
    let x = w - y;
    (x, y)
}

fn tri(w: u64) -> u128 {
    w as u128 * (w as u128 + 1) / 2
}
