//! Grid arguments: comma-separated values, each either a number or an
//! inclusive range `start:stop:step`.

use std::fmt::Display;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

pub trait GridValue: Copy + PartialOrd + FromStr + Display {
    fn step_by(self, step: Self, count: usize) -> Self;
    fn steps_between(start: Self, stop: Self, step: Self) -> Result<usize>;
}

macro_rules! int_grid {
    ($($t:ty),*) => {$(
        impl GridValue for $t {
            fn step_by(self, step: Self, count: usize) -> Self {
                self + step * count as $t
            }
            fn steps_between(start: Self, stop: Self, step: Self) -> Result<usize> {
                if step == 0 {
                    bail!("range step must be positive");
                }
                Ok(((stop - start) / step) as usize)
            }
        }
    )*};
}

int_grid!(u32, u64, usize);

impl GridValue for f64 {
    fn step_by(self, step: Self, count: usize) -> Self {
        self + step * count as f64
    }
    fn steps_between(start: Self, stop: Self, step: Self) -> Result<usize> {
        if !(step > 0.0 && step.is_finite()) {
            bail!("range step must be positive");
        }
        // tolerate rounding so that 0:1:0.1 includes 1
        Ok(((stop - start) / step + 1e-9).floor() as usize)
    }
}

pub fn parse_grid<T>(text: &str) -> Result<Vec<T>>
where
    T: GridValue,
    <T as FromStr>::Err: std::error::Error + Send + Sync + 'static,
{
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim) {
        if item.is_empty() {
            bail!("empty entry in grid {text:?}");
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [single] => out.push(single.parse().with_context(|| format!("bad grid value {single:?}"))?),
            [start, stop, step] => {
                let start: T = start.parse().with_context(|| format!("bad range start in {item:?}"))?;
                let stop: T = stop.parse().with_context(|| format!("bad range stop in {item:?}"))?;
                let step: T = step.parse().with_context(|| format!("bad range step in {item:?}"))?;
                if stop < start {
                    bail!("range {item:?} runs backwards");
                }
                let count = T::steps_between(start, stop, step)?;
                out.extend((0..=count).map(|i| start.step_by(step, i)));
            }
            _ => return Err(anyhow!("grid entry {item:?} is neither a value nor start:stop:step")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_grid::<u32>("8,12,16").unwrap(), vec![8, 12, 16]);
        assert_eq!(parse_grid::<u32>("8:20:4").unwrap(), vec![8, 12, 16, 20]);
        assert_eq!(parse_grid::<usize>("1:3:1,7").unwrap(), vec![1, 2, 3, 7]);
        assert_eq!(parse_grid::<u32>("3:8:2").unwrap(), vec![3, 5, 7]);
        let hs = parse_grid::<f64>("0:1:0.25").unwrap();
        assert_eq!(hs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid::<f64>("0:0.3:0.1").unwrap().len(), 4);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_grid::<u32>("").is_err());
        assert!(parse_grid::<u32>("1,,2").is_err());
        assert!(parse_grid::<u32>("5:1:1").is_err());
        assert!(parse_grid::<u32>("1:5:0").is_err());
        assert!(parse_grid::<u32>("1:5").is_err());
        assert!(parse_grid::<u32>("x").is_err());
        assert!(parse_grid::<f64>("0:1:-0.1").is_err());
    }
}
