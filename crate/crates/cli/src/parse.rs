//! Flag parsing helpers: complex literals like `0.5`, `-0.3+0.2i`, `1e-3-2i`
//! and family construction from the command line.

use num_complex::Complex64;

/// Parse a complex literal. Accepts plain reals, pure imaginaries (`2i`,
/// `-i`) and `a±bi` with scientific notation on either part.
pub fn parse_complex(input: &str) -> Result<Complex64, String> {
    let t: String = input.trim().replace(' ', "");
    if t.is_empty() {
        return Err("empty complex literal".into());
    }
    if let Ok(re) = t.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    let Some(u) = t.strip_suffix('i').or_else(|| t.strip_suffix('I')) else {
        return Err(format!("cannot parse '{input}' as a complex number"));
    };
    // last +/- that is not an exponent sign splits real and imaginary parts
    let bytes = u.as_bytes();
    let mut split = None;
    for p in (1..bytes.len()).rev() {
        if (bytes[p] == b'+' || bytes[p] == b'-') && bytes[p - 1] != b'e' && bytes[p - 1] != b'E' {
            split = Some(p);
            break;
        }
    }
    let parse_imag = |s: &str| -> Result<f64, String> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => s
                .parse::<f64>()
                .map_err(|_| format!("bad imaginary part '{s}' in '{input}'")),
        }
    };
    match split {
        Some(p) => {
            let re: f64 = u[..p]
                .parse()
                .map_err(|_| format!("bad real part '{}' in '{input}'", &u[..p]))?;
            Ok(Complex64::new(re, parse_imag(&u[p..])?))
        }
        None => Ok(Complex64::new(0.0, parse_imag(u)?)),
    }
}
