//! Instance files: JSON, or a line format for hand editing:
//!
//! ```text
//! # comment
//! m 225
//! primes 3 2 5 2
//! a 0 15 30
//! b 0 25 50
//! ```

use cyclotile::{Modulus, Multiset, TilingInstance};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primes: Option<Vec<(u64, u32)>>,
    #[serde(default)]
    pub a: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights_a: Option<Vec<(usize, i64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights_b: Option<Vec<(usize, i64)>>,
}

impl InstanceFile {
    pub fn new(m: u64, a: Vec<usize>, b: Option<Vec<usize>>) -> Self {
        Self { m, primes: None, a, b, weights_a: None, weights_b: None }
    }

    /// Parses JSON when the first non-blank character is `{`, the line format otherwise.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)?
        } else {
            Self::parse_text(text)?
        };
        file.validate()?;
        Ok(file)
    }

    fn parse_text(text: &str) -> Result<Self, CliError> {
        let mut m = None;
        let mut file = Self::new(0, Vec::new(), None);
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| CliError::Text { line: n + 1, msg };
            let mut words = line.split_whitespace();
            let key = words.next().unwrap_or_default();
            let nums: Vec<u64> = words
                .map(|w| w.parse::<u64>().map_err(|_| err(format!("not a number: {w}"))))
                .collect::<Result<_, _>>()?;
            match key {
                "m" => match nums[..] {
                    [v] => m = Some(v),
                    _ => return Err(err("`m` takes one value".into())),
                },
                "primes" => {
                    if nums.len() % 2 != 0 {
                        return Err(err("`primes` takes prime/exponent pairs".into()));
                    }
                    file.primes = Some(nums.chunks(2).map(|c| (c[0], c[1] as u32)).collect());
                }
                "a" => file.a = nums.into_iter().map(|x| x as usize).collect(),
                "b" => file.b = Some(nums.into_iter().map(|x| x as usize).collect()),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        file.m = m.ok_or(CliError::Text { line: 0, msg: "missing `m`".into() })?;
        Ok(file)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Invalid(msg));
        if self.m == 0 {
            return bad("m must be positive".into());
        }
        for (name, set) in [("a", Some(&self.a)), ("b", self.b.as_ref())] {
            let Some(set) = set else { continue };
            if let Some(&x) = set.iter().find(|&&x| x as u64 >= self.m) {
                return bad(format!("{name} contains {x}, outside [0, {})", self.m));
            }
            if set.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("{name} is not strictly increasing"));
            }
        }
        for (name, w) in [("weights_a", &self.weights_a), ("weights_b", &self.weights_b)] {
            if let Some(w) = w {
                if w.iter().any(|&(x, _)| x as u64 >= self.m) {
                    return bad(format!("{name} has an element outside [0, {})", self.m));
                }
            }
        }
        if let Some(primes) = &self.primes {
            let modulus = Modulus::new(primes)?;
            if modulus.m() != self.m {
                return bad(format!("primes multiply to {}, not {}", modulus.m(), self.m));
            }
        }
        Ok(())
    }

    pub fn modulus(&self) -> Result<Modulus, CliError> {
        Ok(match &self.primes {
            Some(p) => Modulus::new(p)?,
            None => Modulus::from_order(self.m)?,
        })
    }

    fn build(&self, set: &[usize], weights: &Option<Vec<(usize, i64)>>) -> Result<Multiset, CliError> {
        let m = self.m as usize;
        Ok(match weights {
            Some(w) => {
                let mut v = vec![0i64; m];
                for &(x, c) in w {
                    v[x] += c;
                }
                Multiset::from_weights(v)
            }
            None => Multiset::from_set(m, set)?,
        })
    }

    pub fn set_a(&self) -> Result<Multiset, CliError> {
        self.build(&self.a, &self.weights_a)
    }

    pub fn set_b(&self) -> Result<Multiset, CliError> {
        match &self.b {
            Some(b) => self.build(b, &self.weights_b),
            None if self.weights_b.is_some() => self.build(&[], &self.weights_b),
            None => Err(CliError::MissingSet("b")),
        }
    }

    pub fn instance(&self) -> Result<TilingInstance, CliError> {
        Ok(TilingInstance::new(self.modulus()?, self.set_a()?, self.set_b()?)?)
    }

    pub fn from_instance(inst: &TilingInstance) -> Self {
        Self::new(inst.modulus().m(), inst.a().support(), Some(inst.b().support()))
    }

    /// Compact JSON with fixed key order and a trailing newline.
    pub fn to_canonical(&self) -> String {
        let mut s = serde_json::to_string(self).expect("instance files always serialize");
        s.push('\n');
        s
    }
}
