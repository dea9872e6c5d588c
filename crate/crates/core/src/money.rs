//! Money is whole US dollars in `u64`; nothing in the pipeline uses floats for
//! cost.

use alloc::string::{String, ToString};

/// Budget limit used when an intent states no budget: 2^53 - 1, large enough
/// to never bind and still exactly representable in JSON numbers.
pub const NO_BUDGET_SENTINEL: u64 = (1 << 53) - 1;

/// `1400000` -> `"$1,400,000"`.
pub fn format_usd(amount: u64) -> String {
    let digits = amount.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3 + 1);
    out.push('$');
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separators() {
        assert_eq!(format_usd(0), "$0");
        assert_eq!(format_usd(999), "$999");
        assert_eq!(format_usd(1000), "$1,000");
        assert_eq!(format_usd(1_400_000), "$1,400,000");
        assert_eq!(format_usd(NO_BUDGET_SENTINEL), "$9,007,199,254,740,991");
    }
}
