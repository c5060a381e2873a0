//! Experiment drivers shared by the CLI and the acceptance suite.

pub mod bench;
pub mod oracle;
pub mod ring;
pub mod sphere;

/// Parses `1,2,5` or a range `1..6` (inclusive) or a mix `1..3,8`.
pub fn parse_list<T>(s: &str) -> crate::Result<Vec<T>>
where
    T: std::str::FromStr + TryFrom<u64>,
{
    let bad = || crate::Error::Usage(format!("cannot parse list {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            for v in a..=b {
                out.push(T::try_from(v).map_err(|_| bad())?);
            }
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::parse_list;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list::<u32>("1..3,8").unwrap(), vec![1, 2, 3, 8]);
        assert_eq!(parse_list::<u32>("4").unwrap(), vec![4]);
        assert!(parse_list::<u32>("").unwrap().is_empty());
        assert!(parse_list::<u32>("a").is_err());
    }
}
