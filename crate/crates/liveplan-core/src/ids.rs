//! Identifier newtypes shared across the engine.
//!
//! All identifiers order lexicographically; the engine leans on that for
//! deterministic iteration everywhere (`BTreeMap`/`BTreeSet` keyed by ids).

use alloc::string::String;
use core::fmt;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(String::from(s))
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(
    /// A configured instance: configurable software plus its applied configurations.
    CiId
);
id_type!(
    /// A node (physical or virtual) on which CI components are deployed.
    NodeId
);
id_type!(
    /// A boundary environment of one CI.
    EnvId
);
id_type!(
    /// A service instance (the workload handled by a single CI).
    SiId
);
id_type!(
    /// A test suite item: one test case or test design technique.
    TsiId
);
id_type!(
    /// A test runtime framework.
    FrameworkId
);

/// A TSI application: a TSI bound to one of its call paths.
///
/// Rendered as `<tsi>-<index>`, e.g. `TC1-0` is the application of `TC1`
/// to its first call path.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AppId {
    pub tsi: TsiId,
    pub index: usize,
}

impl AppId {
    pub fn new(tsi: TsiId, index: usize) -> Self {
        Self { tsi, index }
    }
}

impl fmt::Display for AppId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.tsi, self.index)
    }
}

impl fmt::Debug for AppId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AppId({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn app_ids_order_by_tsi_then_index() {
        let a = AppId::new(TsiId::from("TC1"), 2);
        let b = AppId::new(TsiId::from("TC1"), 10);
        let c = AppId::new(TsiId::from("TC2"), 0);
        assert!(a < b);
        assert!(b < c);
        assert_eq!(alloc::format!("{b}"), "TC1-10");
    }
}
