//! Exact rational arithmetic used for every cost, rate and objective value.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

/// Exact rational number. All objective values and bounds use this type so
/// that independent solver runs agree bit for bit.
pub type Q = Ratio<i128>;

pub fn q(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn qf(num: i128, den: i128) -> Q {
    Q::new(num, den)
}

/// Parses `12`, `-3`, `2.5`, `1/3` or `1e6` style literals into an exact rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_q(n)?;
        let d = parse_q(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    if let Some((mantissa, exp)) = s.split_once(['e', 'E']) {
        let m = parse_q(mantissa)?;
        let e: i32 = exp.parse().ok()?;
        if e.unsigned_abs() > 30 {
            return None;
        }
        let scale = q(10).pow(e);
        return Some(m * scale);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if frac_part.len() > 30 || int_part.len() > 30 {
        return None;
    }
    let int_val: i128 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    let mut value = q(int_val);
    if !frac_part.is_empty() {
        let den = 10i128.checked_pow(frac_part.len() as u32)?;
        let num: i128 = frac_part.parse().ok()?;
        value += Q::new(num, den);
    }
    Some(if neg { -value } else { value })
}

/// Canonical text form: `7`, `-3`, `11/2`. Round-trips through [`parse_q`].
pub fn format_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer `>= v`.
pub fn ceil_u32(v: &Q) -> u32 {
    let c = v.ceil().to_integer();
    c.max(0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_literal_forms() {
        assert_eq!(parse_q("12"), Some(q(12)));
        assert_eq!(parse_q("-3"), Some(q(-3)));
        assert_eq!(parse_q("2.5"), Some(qf(5, 2)));
        assert_eq!(parse_q("1/3"), Some(qf(1, 3)));
        assert_eq!(parse_q("1e6"), Some(q(1_000_000)));
        assert_eq!(parse_q("5.5e6"), Some(q(5_500_000)));
        assert_eq!(parse_q(".5"), Some(qf(1, 2)));
        assert_eq!(parse_q("abc"), None);
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(parse_q(""), None);
    }

    #[test]
    fn format_round_trips() {
        for v in [q(0), q(-4), qf(11, 2), qf(-7, 3)] {
            assert_eq!(parse_q(&format_q(&v)), Some(v));
        }
    }

    #[test]
    fn ceiling() {
        assert_eq!(ceil_u32(&qf(9, 2)), 5);
        assert_eq!(ceil_u32(&q(4)), 4);
        assert_eq!(ceil_u32(&q(0)), 0);
    }
}
