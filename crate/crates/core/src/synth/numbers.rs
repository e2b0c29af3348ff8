//! Numeric table cell formats.

use super::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumberFormat {
    /// 0..=100, e.g. "16".
    SmallInt,
    /// 0..=9999, e.g. "4567".
    Int,
    /// -999..=999, e.g. "-453".
    SignedInt,
    /// 0..=100 with a percent sign, e.g. "45%".
    Percent,
    /// [0, 100) with two decimals and a percent sign, e.g. "23.45%".
    DecimalPercent,
    /// [0, 100) with two decimals, e.g. "15.87".
    Decimal,
    /// [0, 1) with three decimals, e.g. "0.834".
    Fraction,
    /// (-1, 0] with three decimals, e.g. "-0.452".
    NegativeFraction,
    /// $0..=$9999, e.g. "$2567".
    Dollars,
    /// $0..=$999, e.g. "$754".
    SmallDollars,
}

impl NumberFormat {
    pub const ALL: [NumberFormat; 10] = [
        NumberFormat::SmallInt,
        NumberFormat::Int,
        NumberFormat::SignedInt,
        NumberFormat::Percent,
        NumberFormat::DecimalPercent,
        NumberFormat::Decimal,
        NumberFormat::Fraction,
        NumberFormat::NegativeFraction,
        NumberFormat::Dollars,
        NumberFormat::SmallDollars,
    ];

    pub fn index(self) -> usize {
        NumberFormat::ALL.iter().position(|f| *f == self).unwrap()
    }

    pub fn render(self, rng: &mut SplitMix64) -> String {
        match self {
            NumberFormat::SmallInt => rng.int_in(0, 100).to_string(),
            NumberFormat::Int => rng.int_in(0, 9999).to_string(),
            NumberFormat::SignedInt => rng.int_in(-999, 999).to_string(),
            NumberFormat::Percent => format!("{}%", rng.int_in(0, 100)),
            NumberFormat::DecimalPercent => {
                let v = rng.int_in(0, 9999);
                format!("{}.{:02}%", v / 100, v % 100)
            }
            NumberFormat::Decimal => {
                let v = rng.int_in(0, 9999);
                format!("{}.{:02}", v / 100, v % 100)
            }
            NumberFormat::Fraction => format!("0.{:03}", rng.int_in(0, 999)),
            NumberFormat::NegativeFraction => {
                let v = rng.int_in(0, 999);
                if v == 0 {
                    "0.000".to_string()
                } else {
                    format!("-0.{v:03}")
                }
            }
            NumberFormat::Dollars => format!("${}", rng.int_in(0, 9999)),
            NumberFormat::SmallDollars => format!("${}", rng.int_in(0, 999)),
        }
    }

    /// Checks that `s` is something this format can produce.
    pub fn matches(self, s: &str) -> bool {
        fn int(s: &str, lo: i64, hi: i64) -> bool {
            let digits = s.strip_prefix('-').unwrap_or(s);
            !digits.is_empty()
                && digits.bytes().all(|b| b.is_ascii_digit())
                && (digits.len() == 1 || !digits.starts_with('0'))
                && s.parse::<i64>().is_ok_and(|v| (lo..=hi).contains(&v) && !(v == 0 && s.starts_with('-')))
        }
        fn decimal(s: &str, places: usize, whole_lo: i64, whole_hi: i64) -> bool {
            match s.split_once('.') {
                Some((w, f)) => {
                    int(w, whole_lo, whole_hi)
                        && f.len() == places
                        && f.bytes().all(|b| b.is_ascii_digit())
                }
                None => false,
            }
        }
        match self {
            NumberFormat::SmallInt => int(s, 0, 100),
            NumberFormat::Int => int(s, 0, 9999),
            NumberFormat::SignedInt => int(s, -999, 999),
            NumberFormat::Percent => s.strip_suffix('%').is_some_and(|v| int(v, 0, 100)),
            NumberFormat::DecimalPercent => {
                s.strip_suffix('%').is_some_and(|v| decimal(v, 2, 0, 99))
            }
            NumberFormat::Decimal => decimal(s, 2, 0, 99),
            NumberFormat::Fraction => decimal(s, 3, 0, 0),
            NumberFormat::NegativeFraction => {
                s == "0.000" || s.strip_prefix("-0.").is_some_and(|f| {
                    f.len() == 3 && f.bytes().all(|b| b.is_ascii_digit()) && f != "000"
                })
            }
            NumberFormat::Dollars => s.strip_prefix('$').is_some_and(|v| int(v, 0, 9999)),
            NumberFormat::SmallDollars => s.strip_prefix('$').is_some_and(|v| int(v, 0, 999)),
        }
    }
}

/// A number in one of the ten formats, chosen uniformly.
pub fn sample_number(rng: &mut SplitMix64) -> (NumberFormat, String) {
    let f = NumberFormat::ALL[rng.index(NumberFormat::ALL.len())];
    (f, f.render(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_draw_matches_its_pattern() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..20_000 {
            let (f, s) = sample_number(&mut rng);
            assert!(f.matches(&s), "{f:?} produced {s:?}");
        }
    }

    #[test]
    fn examples_match_their_formats() {
        assert!(NumberFormat::SmallInt.matches("16"));
        assert!(NumberFormat::Int.matches("4567"));
        assert!(NumberFormat::SignedInt.matches("-453"));
        assert!(NumberFormat::Percent.matches("45%"));
        assert!(NumberFormat::DecimalPercent.matches("23.45%"));
        assert!(NumberFormat::Decimal.matches("15.87"));
        assert!(NumberFormat::Fraction.matches("0.834"));
        assert!(NumberFormat::NegativeFraction.matches("-0.452"));
        assert!(NumberFormat::Dollars.matches("$2567"));
        assert!(NumberFormat::SmallDollars.matches("$754"));
        assert!(!NumberFormat::SmallDollars.matches("$2567"));
        assert!(!NumberFormat::SmallInt.matches("101"));
        assert!(!NumberFormat::Fraction.matches("1.000"));
    }

    #[test]
    fn seeded_draws_repeat() {
        let a: Vec<_> = {
            let mut r = SplitMix64::new(11);
            (0..50).map(|_| sample_number(&mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = SplitMix64::new(11);
            (0..50).map(|_| sample_number(&mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn formats_are_uniform() {
        let mut rng = SplitMix64::new(5);
        let mut counts = [0usize; 10];
        let n = 50_000;
        for _ in 0..n {
            counts[sample_number(&mut rng).0.index()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.1).abs() < 0.01);
        }
    }
}
