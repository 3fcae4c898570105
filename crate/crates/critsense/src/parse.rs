//! Parsers for the command-line mini-grammars.

use critsense_core::Domain;

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
        })
        .collect()
}

/// A comma-separated point such as `0.4,-0.1`.
pub fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    let p = numbers(s)?;
    if p.is_empty() || p.len() > 3 {
        return Err(format!("points need 1 to 3 coordinates, got `{s}`"));
    }
    Ok(p)
}

/// `interval:a,b` | `box:lo1,lo2:hi1,hi2` | `ball:cx,cy:r`.
pub fn parse_domain(s: &str) -> Result<Domain, String> {
    let usage = "expected interval:a,b | box:lo1,..:hi1,.. | ball:c1,..:r";
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    match (kind, rest.as_slice()) {
        ("interval", [ab]) => {
            let v = numbers(ab)?;
            match v.as_slice() {
                [a, b] if a < b => Ok(Domain::interval(*a, *b)),
                _ => Err(format!("interval needs two increasing endpoints; {usage}")),
            }
        }
        ("box", [lo, hi]) => {
            let (lo, hi) = (numbers(lo)?, numbers(hi)?);
            if lo.len() != hi.len() || lo.is_empty() || lo.len() > 3 {
                return Err(format!("box corners need matching dimension 1 to 3; {usage}"));
            }
            if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                return Err("box needs lo < hi in every coordinate".into());
            }
            Ok(Domain::cube(lo, hi))
        }
        ("ball", [c, r]) => {
            let c = numbers(c)?;
            let r: f64 = r.trim().parse().map_err(|_| format!("`{r}` is not a radius"))?;
            if c.is_empty() || c.len() > 3 || r.is_nan() || r <= 0.0 {
                return Err(format!("ball needs 1 to 3 center coordinates and a positive radius; {usage}"));
            }
            Ok(Domain::ball(c, r))
        }
        _ => Err(format!("cannot parse domain `{s}`; {usage}")),
    }
}
