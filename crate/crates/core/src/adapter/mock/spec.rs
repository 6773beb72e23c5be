//! Mock dialect description file.
//!
//! ```text
//! # comment
//! [supported]
//! *                  every catalog feature (the `*` operator is only reachable this way)
//! -RIGHT_JOIN        remove one (`--` removes the minus operator)
//! NULLIF             add one back
//! [typing]
//! static             or: dynamic
//! [bugs]
//! NULLIF,!=<TAB>first-arg NULLIF
//! [flaky]
//! SIN<TAB>0.9        success probability of statements using SIN
//! [seed]
//! 7                  seed of the flakiness stream
//! ```
//!
//! Bug effects: `first-arg F` (F returns its first argument), `null-true F`
//! (a NULL result of F becomes TRUE) and `negate F` (F's boolean result is
//! inverted). A bug fires only while evaluating the WHERE clause of a top-level
//! SELECT whose predicate uses every trigger feature and whose root is neither
//! NOT nor IS NULL.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::feature::{ids, Catalog, Category, FeatureId};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Typing {
    Static,
    Dynamic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BugEffect {
    FirstArg,
    NullTrue,
    Negate,
}

impl BugEffect {
    fn token(self) -> &'static str {
        match self {
            BugEffect::FirstArg => "first-arg",
            BugEffect::NullTrue => "null-true",
            BugEffect::Negate => "negate",
        }
    }

    fn from_token(t: &str) -> Option<BugEffect> {
        Some(match t {
            "first-arg" => BugEffect::FirstArg,
            "null-true" => BugEffect::NullTrue,
            "negate" => BugEffect::Negate,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BugInjection {
    pub trigger: BTreeSet<FeatureId>,
    pub effect: BugEffect,
    pub target: FeatureId,
}

impl fmt::Display for BugInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let trig: Vec<&str> = self.trigger.iter().map(FeatureId::as_str).collect();
        write!(
            f,
            "{}\t{} {}",
            trig.join(","),
            self.effect.token(),
            self.target
        )
    }
}

/// A resolved mock dialect: which base features it accepts, how it types,
/// and which logic bugs it carries.
#[derive(Clone, Debug, PartialEq)]
pub struct MockSpec {
    pub supported: BTreeSet<FeatureId>,
    pub typing: Typing,
    pub bugs: Vec<BugInjection>,
    pub flaky: BTreeMap<FeatureId, f64>,
    pub seed: u64,
}

impl MockSpec {
    /// Everything supported, static typing, no bugs.
    pub fn full(catalog: &Catalog) -> MockSpec {
        MockSpec {
            supported: (0..catalog.base_len())
                .map(|i| catalog.id(i).clone())
                .collect(),
            typing: Typing::Static,
            bugs: Vec::new(),
            flaky: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn load(path: &Path, catalog: &Catalog) -> Result<MockSpec, SpecError> {
        MockSpec::parse(&std::fs::read_to_string(path)?, catalog)
    }

    pub fn parse(text: &str, catalog: &Catalog) -> Result<MockSpec, SpecError> {
        let mut spec = MockSpec {
            supported: BTreeSet::new(),
            typing: Typing::Static,
            bugs: Vec::new(),
            flaky: BTreeMap::new(),
            seed: 0,
        };
        let mut section = "";
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let err = |message: String| SpecError::Parse {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim_end();
            if line.trim().is_empty() {
                continue;
            }
            let base_feature = |id: &str| -> Result<FeatureId, SpecError> {
                match catalog.index_of(id) {
                    Some(i) if catalog.category(i) != Category::CompositeArgType => {
                        Ok(catalog.id(i).clone())
                    }
                    _ => Err(err(format!("unknown feature `{id}`"))),
                }
            };
            if let Some(name) = line
                .trim()
                .strip_prefix('[')
                .and_then(|l| l.strip_suffix(']'))
            {
                section = match name {
                    "supported" => "supported",
                    "typing" => "typing",
                    "bugs" => "bugs",
                    "flaky" => "flaky",
                    "seed" => "seed",
                    other => return Err(err(format!("unknown section `{other}`"))),
                };
                continue;
            }
            let line = line.trim();
            match section {
                "supported" => {
                    if line == "*" {
                        spec.supported
                            .extend((0..catalog.base_len()).map(|i| catalog.id(i).clone()));
                    } else if let Some(id) = line.strip_prefix('-').filter(|id| !id.is_empty()) {
                        spec.supported.remove(&base_feature(id)?);
                    } else {
                        spec.supported.insert(base_feature(line)?);
                    }
                }
                "typing" => {
                    spec.typing = match line {
                        "static" => Typing::Static,
                        "dynamic" => Typing::Dynamic,
                        other => {
                            return Err(err(format!(
                                "typing must be static or dynamic, not `{other}`"
                            )))
                        }
                    }
                }
                "bugs" => {
                    let (trigger, rule) = line
                        .split_once('\t')
                        .ok_or_else(|| err("expected TRIGGERS<TAB>EFFECT TARGET".into()))?;
                    let (effect, target) = rule
                        .trim()
                        .split_once(' ')
                        .ok_or_else(|| err("expected EFFECT TARGET".into()))?;
                    let effect = BugEffect::from_token(effect)
                        .ok_or_else(|| err(format!("unknown effect `{effect}`")))?;
                    let trigger = trigger
                        .split(',')
                        .map(|t| base_feature(t.trim()))
                        .collect::<Result<BTreeSet<_>, _>>()?;
                    let target = base_feature(target.trim())?;
                    if !trigger.contains(&target) {
                        return Err(err(format!(
                            "target `{target}` must be one of the trigger features"
                        )));
                    }
                    spec.bugs.push(BugInjection {
                        trigger,
                        effect,
                        target,
                    });
                }
                "flaky" => {
                    let (id, p) = line
                        .split_once('\t')
                        .ok_or_else(|| err("expected FEATURE<TAB>PROBABILITY".into()))?;
                    let p: f64 = p
                        .trim()
                        .parse()
                        .map_err(|_| err(format!("bad probability `{p}`")))?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(err(format!("probability {p} outside [0, 1]")));
                    }
                    spec.flaky.insert(base_feature(id.trim())?, p);
                }
                "seed" => {
                    spec.seed = line
                        .parse()
                        .map_err(|_| err(format!("bad seed `{line}`")))?
                }
                _ => return Err(err("content before the first section".into())),
            }
        }
        for bug in &spec.bugs {
            if let Some(f) = bug.trigger.iter().find(|f| !spec.supported.contains(*f)) {
                return Err(SpecError::Parse {
                    line: 0,
                    message: format!("bug trigger `{f}` is not a supported feature"),
                });
            }
        }
        Ok(spec)
    }

    pub fn to_file_string(&self, catalog: &Catalog) -> String {
        // The multiplication feature is spelled `*`, so write removals from the full set.
        let mut out = String::from("[supported]\n*\n");
        for i in 0..catalog.base_len() {
            let id = catalog.id(i);
            if !self.supported.contains(id) {
                out.push_str(&format!("-{id}\n"));
            }
        }
        out.push_str(&format!(
            "[typing]\n{}\n",
            match self.typing {
                Typing::Static => "static",
                Typing::Dynamic => "dynamic",
            }
        ));
        if !self.bugs.is_empty() {
            out.push_str("[bugs]\n");
            for b in &self.bugs {
                out.push_str(&format!("{b}\n"));
            }
        }
        if !self.flaky.is_empty() {
            out.push_str("[flaky]\n");
            for (id, p) in &self.flaky {
                out.push_str(&format!("{id}\t{p}\n"));
            }
        }
        out.push_str(&format!("[seed]\n{}\n", self.seed));
        out
    }

    /// Whether the dialect accepts `idx`. Composite features follow their
    /// function; implicit casts follow the typing discipline.
    pub fn supports(&self, catalog: &Catalog, idx: usize) -> bool {
        let e = catalog.entry(idx);
        if let Some((func, _, _)) = e.composite_of {
            return self.supports(catalog, func);
        }
        if e.id.as_str() == ids::IMPLICIT_CAST {
            return self.typing == Typing::Dynamic;
        }
        self.supported.contains(&e.id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_sections() {
        let c = Catalog::default_catalog();
        let text = "# dialect\n[supported]\n*\n-RIGHT_JOIN\n-INDEX\nINDEX\n[typing]\ndynamic\n[bugs]\nNULLIF,!=\tfirst-arg NULLIF\n[flaky]\nSIN\t0.5\n[seed]\n9\n";
        let s = MockSpec::parse(text, &c).unwrap();
        assert_eq!(s.supported.len(), 99);
        assert!(!s.supported.contains(&c.feature("RIGHT_JOIN").unwrap()));
        assert_eq!(s.typing, Typing::Dynamic);
        assert_eq!(s.bugs[0].effect, BugEffect::FirstArg);
        assert_eq!(s.flaky.len(), 1);
        assert_eq!(s.seed, 9);
        assert!(s.supports(&c, c.index_of("SIN1STRING").unwrap()));
        assert!(s.supports(&c, c.index_of("IMPLICIT_CAST").unwrap()));
        let again = MockSpec::parse(&s.to_file_string(&c), &c).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn rejects_bad_lines() {
        let c = Catalog::default_catalog();
        for bad in [
            "[supported]\nNOPE\n",
            "[bugs]\nNULLIF,!=\tfirst-arg NULLIF\n",
            "[supported]\n*\n[bugs]\nNULLIF\tshuffle NULLIF\n",
            "[supported]\n*\n[bugs]\nNULLIF\tnegate !=\n",
            "[flaky]\nSIN\t1.5\n",
            "SIN\n",
            "[supported]\nSIN1INT\n",
        ] {
            assert!(MockSpec::parse(bad, &c).is_err(), "{bad:?}");
        }
        match MockSpec::parse("[typing]\n\nloose\n", &c) {
            Err(SpecError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
