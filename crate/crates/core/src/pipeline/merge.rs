use std::collections::HashSet;

use thiserror::Error;

use crate::sva::AssertionSuite;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("repair response declares '{0}' more than once")]
    DuplicateName(String),
}

/// First name that occurs twice in `suite`, if any.
pub fn duplicate_name(suite: &AssertionSuite) -> Option<&str> {
    let mut seen = HashSet::new();
    suite
        .assertions
        .iter()
        .map(|a| a.name.as_str())
        .find(|n| !seen.insert(*n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Merged {
    pub suite: AssertionSuite,
    /// Failing assertions dropped because the response replaced them with new ones.
    pub retired: Vec<String>,
}

/// Folds a repair response into the current suite.
///
/// Same-named assertions are replaced in place and new names are appended in
/// response order. A name in `failing` that the response does not re-emit is
/// retired when the response introduced at least one new name.
pub fn merge_repair(old: &AssertionSuite, repaired: &AssertionSuite, failing: &[String]) -> Result<Merged, MergeError> {
    if let Some(dup) = duplicate_name(repaired) {
        return Err(MergeError::DuplicateName(dup.to_owned()));
    }
    let mut suite = old.clone();
    let mut added = false;
    for a in &repaired.assertions {
        match suite.assertions.iter_mut().find(|o| o.name == a.name) {
            Some(slot) => *slot = a.clone(),
            None => {
                suite.assertions.push(a.clone());
                added = true;
            }
        }
    }
    let mut retired = Vec::new();
    if added {
        suite.assertions.retain(|o| {
            let drop = failing.contains(&o.name) && repaired.get(&o.name).is_none();
            if drop {
                retired.push(o.name.clone());
            }
            !drop
        });
    }
    Ok(Merged { suite, retired })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sva::{Assertion, Origin};

    fn suite(names: &[&str], tag: &str) -> AssertionSuite {
        let mut s = AssertionSuite::new("d");
        for n in names {
            let src = format!("property {n};\n  @(posedge clk) {tag};\nendproperty\nassert property ({n});");
            s.assertions.push(Assertion::from_source(&src, Origin::InitialGeneration, n));
        }
        s
    }

    #[test]
    fn replaces_in_place() {
        let m = merge_repair(&suite(&["a1", "a2"], "x"), &suite(&["a2"], "y"), &["a2".into()]).unwrap();
        assert_eq!(m.suite.names(), ["a1", "a2"]);
        assert!(m.suite.assertions[1].source_text.contains('y'));
        assert!(m.retired.is_empty());
    }

    #[test]
    fn split_retires_the_failing_original() {
        let old = suite(&["a1", "a2"], "x");
        let rep = suite(&["a2a", "a2b"], "y");
        let kept = merge_repair(&old, &rep, &[]).unwrap();
        assert_eq!(kept.suite.names(), ["a1", "a2", "a2a", "a2b"]);
        let m = merge_repair(&old, &rep, &["a2".into()]).unwrap();
        assert_eq!(m.suite.names(), ["a1", "a2a", "a2b"]);
        assert_eq!(m.retired, ["a2"]);
    }

    #[test]
    fn append_to_empty_and_duplicates() {
        let m = merge_repair(&AssertionSuite::new("d"), &suite(&["a1"], "x"), &[]).unwrap();
        assert_eq!(m.suite.names(), ["a1"]);
        assert_eq!(
            merge_repair(&m.suite, &suite(&["b", "b"], "x"), &[]),
            Err(MergeError::DuplicateName("b".into()))
        );
    }
}
