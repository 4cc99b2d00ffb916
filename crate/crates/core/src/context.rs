use std::fmt;

use serde::{Deserialize, Serialize};

/// One step from a graph to a derived sub-model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "nodes", rename_all = "snake_case")]
pub enum Transform {
    /// Marginalize a descendant-closed node set.
    RemoveDescendants(Vec<String>),
    /// Pass to the sub-model of a c-component and its parents.
    ExtractComponent(Vec<String>),
}

/// Chain of transforms, applied in order starting from the root model, that
/// produces the graph and covariance a certificate is evaluated against.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Context {
    transforms: Vec<Transform>,
}

impl Context {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn is_root(&self) -> bool {
        self.transforms.is_empty()
    }

    pub fn transforms(&self) -> &[Transform] {
        &self.transforms
    }

    pub fn then(&self, t: Transform) -> Self {
        let mut transforms = self.transforms.clone();
        transforms.push(t);
        Self { transforms }
    }

    /// Context made of the first `len` transforms.
    pub fn prefix(&self, len: usize) -> Self {
        Self {
            transforms: self.transforms[..len].to_vec(),
        }
    }

    /// Stable textual id, e.g. `root/-{v6}/C{v2,v3,v5}`.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for t in &self.transforms {
            match t {
                Transform::RemoveDescendants(n) => write!(f, "/-{{{}}}", n.join(","))?,
                Transform::ExtractComponent(n) => write!(f, "/C{{{}}}", n.join(","))?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_readable_and_stable() {
        let c = Context::root()
            .then(Transform::RemoveDescendants(vec!["v6".into()]))
            .then(Transform::ExtractComponent(vec!["v2".into(), "v3".into()]));
        assert_eq!(c.id(), "root/-{v6}/C{v2,v3}");
        assert_eq!(c.prefix(1).id(), "root/-{v6}");
        assert!(c.prefix(0).is_root());
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(
            json,
            r#"[{"kind":"remove_descendants","nodes":["v6"]},{"kind":"extract_component","nodes":["v2","v3"]}]"#
        );
    }
}
