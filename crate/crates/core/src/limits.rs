//! Size caps for the exhaustive scans.

/// Default largest `n` for scans over every exponent or field element.
pub const DEFAULT_BRUTE_FORCE_MAX_N: u32 = 12;

/// Environment variable overriding [`DEFAULT_BRUTE_FORCE_MAX_N`].
pub const MAX_N_ENV: &str = "CMDUAL_MAX_N";

/// The active cap: `CMDUAL_MAX_N` if set to an integer, else the default.
pub fn brute_force_limit() -> u32 {
    std::env::var(MAX_N_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BRUTE_FORCE_MAX_N)
}
