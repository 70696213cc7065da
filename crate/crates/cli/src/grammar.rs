//! Flag value grammar: comma lists whose items may be inclusive `a..b`
//! integer ranges.

use qcs_core::harness::Budget;

pub fn parse_bits(s: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for item in items(s)? {
        match item.split_once("..") {
            Some((a, b)) => {
                let a: u32 = a.trim().parse().map_err(|_| format!("bad range start in `{item}`"))?;
                let b: u32 = b.trim().parse().map_err(|_| format!("bad range end in `{item}`"))?;
                if a > b {
                    return Err(format!("empty range `{item}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|_| format!("bad bit-depth `{item}`"))?),
        }
    }
    Ok(out)
}

/// ISNR values in dB; `inf` for the noiseless case. `a..b` expands to the
/// integers in between.
pub fn parse_isnr(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in items(s)? {
        if item == "inf" {
            out.push(f64::INFINITY);
        } else if let Some((a, b)) = item.split_once("..") {
            let a: i64 = a.trim().parse().map_err(|_| format!("bad range start in `{item}`"))?;
            let b: i64 = b.trim().parse().map_err(|_| format!("bad range end in `{item}`"))?;
            if a > b {
                return Err(format!("empty range `{item}`"));
            }
            out.extend((a..=b).map(|v| v as f64));
        } else {
            let v: f64 = item.parse().map_err(|_| format!("bad ISNR `{item}`"))?;
            if !v.is_finite() {
                return Err(format!("bad ISNR `{item}`"));
            }
            out.push(v);
        }
    }
    Ok(out)
}

pub fn parse_budgets(s: &str) -> Result<Vec<Budget>, String> {
    items(s)?.into_iter().map(|i| Budget::parse(i).map_err(|e| e.to_string())).collect()
}

fn items(s: &str) -> Result<Vec<&str>, String> {
    let items: Vec<&str> = s.split(',').map(str::trim).collect();
    if items.iter().any(|i| i.is_empty()) {
        return Err(format!("empty item in list `{s}`"));
    }
    Ok(items)
}

/// Stable file-name fragment for a number: `35`, `20.5`, `inf`, `m5`.
pub fn file_tag(v: f64) -> String {
    v.to_string().replace('-', "m")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_bits("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_bits("5..5").unwrap(), vec![5]);
        assert_eq!(parse_bits("1, 2,4..6").unwrap(), vec![1, 2, 4, 5, 6]);
        assert!(parse_bits("6..2").is_err());
        assert!(parse_bits("a").is_err());
        assert!(parse_bits("1,,2").is_err());
        assert_eq!(parse_isnr("35,20,10,5").unwrap(), vec![35.0, 20.0, 10.0, 5.0]);
        assert_eq!(parse_isnr("-3..-1,inf").unwrap(), vec![-3.0, -2.0, -1.0, f64::INFINITY]);
        assert!(parse_isnr("NaN").is_err());
        assert_eq!(parse_budgets("3N,2000,x0.5").unwrap().len(), 3);
        assert_eq!(file_tag(-2.5), "m2.5");
    }
}
