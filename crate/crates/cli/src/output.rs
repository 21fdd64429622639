use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// Number with 9 significant digits, shortest of fixed or exponent form,
/// trailing zeros dropped (like C's `%.9g`). Locale independent.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), fmt_num)
}

/// File at `path`, or stdout.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `# key = value` lines ahead of a CSV table.
pub fn write_comments<W: Write + ?Sized>(w: &mut W, pairs: &[(String, String)]) -> io::Result<()> {
    for (k, v) in pairs {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_num(44.28187312345), "44.2818731");
        assert_eq!(fmt_num(2.0), "2");
        assert_eq!(fmt_num(-0.5), "-0.5");
        assert_eq!(fmt_num(1e-8), "1e-08");
        assert_eq!(fmt_num(1.5e-6), "1.5e-06");
        assert_eq!(fmt_num(123456789.0), "123456789");
        assert_eq!(fmt_num(1234567891.0), "1.23456789e+09");
        assert_eq!(fmt_num(0.000123), "0.000123");
        assert_eq!(fmt_num(0.00001), "1e-05");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn rounding_carries_into_the_exponent() {
        assert_eq!(fmt_num(9.9999999999), "10");
        assert_eq!(fmt_num(0.99999999999), "1");
    }
}
