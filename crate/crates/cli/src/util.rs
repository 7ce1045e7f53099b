use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Errors that decide the process exit code: validation problems exit 2,
/// verification failures exit 1.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn validation_from(err: impl std::fmt::Display) -> CliError {
    CliError::Validation(err.to_string())
}

/// Parse an exact rational written as `p/q` or as a bare integer; the
/// field name goes into the error message.
pub fn parse_rational(text: &str, field: &str) -> CliResult<BigRational> {
    let parse_int = |part: &str| -> CliResult<BigInt> {
        part.trim()
            .parse::<BigInt>()
            .map_err(|_| validation(format!("field `{field}`: `{part}` is not an integer")))
    };
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (parse_int(n)?, parse_int(d)?),
        None => (parse_int(text)?, BigInt::from(1)),
    };
    if den.is_zero() {
        return Err(validation(format!(
            "field `{field}`: rational `{text}` has a zero denominator"
        )));
    }
    if den < BigInt::from(0) {
        return Err(validation(format!(
            "field `{field}`: rational `{text}` must have a positive denominator"
        )));
    }
    Ok(BigRational::new(num, den))
}

pub fn fmt_rational(value: &BigRational) -> String {
    value.to_string()
}

/// Fixed 12-significant-digit rendering so reports are byte-identical for
/// identical inputs.
pub fn fmt_f64(value: f64) -> String {
    if value == 0.0 {
        return "0".to_owned();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let exp = value.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let precision = (11 - exp).max(0) as usize;
        format!("{value:.precision$}")
    } else {
        format!("{value:.11e}")
    }
}

pub fn fmt_vec(values: impl IntoIterator<Item = f64>) -> Vec<serde_json::Value> {
    values
        .into_iter()
        .map(|v| serde_json::Value::String(fmt_f64(v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_integer_forms() {
        assert_eq!(
            parse_rational("3/4", "w").unwrap(),
            BigRational::new(3.into(), 4.into())
        );
        assert_eq!(
            parse_rational("2", "w").unwrap(),
            BigRational::from_integer(2.into())
        );
    }

    #[test]
    fn zero_denominator_names_the_field() {
        let err = parse_rational("1/0", "prior.u1").unwrap_err();
        assert!(err.to_string().contains("prior.u1"));
    }

    #[test]
    fn float_formatting_is_stable() {
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(0.5), "0.500000000000");
        assert_eq!(fmt_f64(23.0 / 40.0), "0.575000000000");
        assert_eq!(fmt_f64(1.0e-7), "1.00000000000e-7");
    }
}
