//! Parser for one-parameter subgroup expressions on the command line.
//!
//! Accepted forms, all describing `λ(t) = exp(log(t)·X)`:
//!
//! * `diag(a, b)` with each slot one of `1` (exponent 0), `t` (exponent 1),
//!   or `t^p` for a real exponent `p` — e.g. `diag(t,1)`, `diag(t^2,t^-1)`;
//! * `gen:[[x11,x12],[x21,x22]]` giving the generator `X` directly.

use affine_torus::cone::OneParamSubgroup;
use affine_torus::Mat2;

pub fn parse(expr: &str) -> Result<OneParamSubgroup, String> {
    let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(body) = compact.strip_prefix("gen:") {
        let rows: [[f64; 2]; 2] = serde_json::from_str(body)
            .map_err(|e| format!("cannot parse generator {body:?}: {e}"))?;
        let x = Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]);
        return Ok(OneParamSubgroup::from_generator(x));
    }
    let body = compact
        .strip_prefix("diag(")
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| format!("unrecognized subgroup expression {expr:?}"))?;
    let slots: Vec<&str> = body.split(',').collect();
    if slots.len() != 2 {
        return Err(format!("diag(..) takes two entries, got {expr:?}"));
    }
    Ok(OneParamSubgroup::diag(parse_exponent(slots[0])?, parse_exponent(slots[1])?))
}

fn parse_exponent(slot: &str) -> Result<f64, String> {
    match slot {
        "1" => Ok(0.0),
        "t" => Ok(1.0),
        _ => slot
            .strip_prefix("t^")
            .and_then(|p| p.parse::<f64>().ok())
            .filter(|p| p.is_finite())
            .ok_or_else(|| format!("diagonal entry must be 1, t, or t^p, got {slot:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_forms() {
        assert_eq!(parse("diag(t,1)").unwrap(), OneParamSubgroup::diag(1.0, 0.0));
        assert_eq!(parse("diag(1, t)").unwrap(), OneParamSubgroup::diag(0.0, 1.0));
        assert_eq!(parse("diag(t,t)").unwrap(), OneParamSubgroup::diag(1.0, 1.0));
        assert_eq!(parse("diag(t^2, t^-0.5)").unwrap(), OneParamSubgroup::diag(2.0, -0.5));
    }

    #[test]
    fn raw_generators() {
        let got = parse("gen:[[2,-1],[0,1]]").unwrap();
        assert_eq!(got.generator, Mat2::new(2.0, -1.0, 0.0, 1.0));
    }

    #[test]
    fn rejections() {
        assert!(parse("diag(t)").is_err());
        assert!(parse("diag(2,1)").is_err());
        assert!(parse("spiral(t)").is_err());
        assert!(parse("gen:[[1,0]]").is_err());
    }
}
