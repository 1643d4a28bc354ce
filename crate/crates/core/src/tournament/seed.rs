//! Per-episode seed derivation.

/// Seat index reserved for the environment's initial draws.
pub const ENVIRONMENT_SEAT: u32 = u32::MAX;
/// Seat index reserved for the role-to-seat shuffle.
pub const COMPOSITION_SEAT: u32 = u32::MAX - 1;
/// Seat index reserved for the Game Master's in-episode randomness.
pub const STEP_SEAT: u32 = u32::MAX - 2;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// 64-bit FNV-1a over the little-endian encoding of
/// `(master_seed, len(scenario_id), scenario_id, run_index, seat_index)`,
/// every integer widened to 64 bits. The length prefix keeps
/// `("ab", 1)` and `("a", ...)` style inputs from colliding by concatenation.
pub fn derive_seed(master_seed: u64, scenario_id: &str, run_index: u32, seat_index: u32) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &master_seed.to_le_bytes());
    h = fnv1a(h, &(scenario_id.len() as u64).to_le_bytes());
    h = fnv1a(h, scenario_id.as_bytes());
    h = fnv1a(h, &u64::from(run_index).to_le_bytes());
    fnv1a(h, &u64::from(seat_index).to_le_bytes())
}
