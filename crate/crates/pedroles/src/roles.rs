//! The seven pedagogical roles and sets of them.

use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ROLE_COUNT: usize = 7;

/// A document's pedagogical role. The declaration order is the canonical
/// order used everywhere: tables, tie-breaking, serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Survey,
    Tutorial,
    Resource,
    ReferenceWork,
    EmpiricalResults,
    SoftwareManual,
    Other,
}

impl Role {
    pub const ALL: [Role; ROLE_COUNT] = [
        Role::Survey,
        Role::Tutorial,
        Role::Resource,
        Role::ReferenceWork,
        Role::EmpiricalResults,
        Role::SoftwareManual,
        Role::Other,
    ];

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Role {
        Role::ALL[index]
    }

    /// Exact serialized name.
    pub fn name(self) -> &'static str {
        match self {
            Role::Survey => "Survey",
            Role::Tutorial => "Tutorial",
            Role::Resource => "Resource",
            Role::ReferenceWork => "ReferenceWork",
            Role::EmpiricalResults => "EmpiricalResults",
            Role::SoftwareManual => "SoftwareManual",
            Role::Other => "Other",
        }
    }

    /// Human-readable name for text reports.
    pub fn display_name(self) -> &'static str {
        match self {
            Role::Survey => "Survey",
            Role::Tutorial => "Tutorial",
            Role::Resource => "Resource",
            Role::ReferenceWork => "Reference Work",
            Role::EmpiricalResults => "Empirical Results",
            Role::SoftwareManual => "Software Manual",
            Role::Other => "Other",
        }
    }

    /// Abbreviated name for confusion-matrix headers.
    pub fn short_name(self) -> &'static str {
        match self {
            Role::Survey => "Sur.",
            Role::Tutorial => "Tut.",
            Role::Resource => "Res.",
            Role::ReferenceWork => "Ref.",
            Role::EmpiricalResults => "Emp.",
            Role::SoftwareManual => "Sof.",
            Role::Other => "Other",
        }
    }

    /// Parse a serialized role name. Unknown names are errors, not warnings.
    pub fn parse(name: &str) -> Result<Role> {
        Role::ALL
            .into_iter()
            .find(|r| r.name() == name)
            .ok_or_else(|| Error::Input(format!("unknown role name {name:?}")))
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Role {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Role {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Role, D::Error> {
        let name = String::deserialize(deserializer)?;
        Role::parse(&name).map_err(de::Error::custom)
    }
}

/// A subset of the seven roles, stored as a bitmask over the canonical order.
///
/// Empty sets are valid classifier output ("no prediction") but never valid
/// resolved ground truth.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RoleSet(u8);

impl RoleSet {
    pub const EMPTY: RoleSet = RoleSet(0);

    pub fn new() -> RoleSet {
        RoleSet(0)
    }

    pub fn singleton(role: Role) -> RoleSet {
        RoleSet(1 << role.index())
    }

    pub fn insert(&mut self, role: Role) {
        self.0 |= 1 << role.index();
    }

    pub fn contains(self, role: Role) -> bool {
        self.0 & (1 << role.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: RoleSet) -> RoleSet {
        RoleSet(self.0 | other.0)
    }

    /// Roles present, in canonical order.
    pub fn iter(self) -> impl Iterator<Item = Role> {
        Role::ALL.into_iter().filter(move |r| self.contains(*r))
    }

    /// The single member, if the set has exactly one.
    pub fn as_singleton(self) -> Option<Role> {
        if self.len() == 1 {
            self.iter().next()
        } else {
            None
        }
    }

    /// First member in canonical order, if any.
    pub fn primary(self) -> Option<Role> {
        self.iter().next()
    }

    /// Size of the symmetric difference.
    pub fn symmetric_difference_len(self, other: RoleSet) -> usize {
        (self.0 ^ other.0).count_ones() as usize
    }

    /// Names joined with `+`, or `-` for the empty set.
    pub fn label(self) -> String {
        if self.is_empty() {
            "-".to_string()
        } else {
            self.iter().map(Role::name).collect::<Vec<_>>().join("+")
        }
    }
}

impl FromIterator<Role> for RoleSet {
    fn from_iter<I: IntoIterator<Item = Role>>(iter: I) -> RoleSet {
        let mut set = RoleSet::new();
        for role in iter {
            set.insert(role);
        }
        set
    }
}

impl fmt::Debug for RoleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.iter().map(Role::name).collect::<Vec<_>>().join(", "))
    }
}

impl Serialize for RoleSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for role in self.iter() {
            seq.serialize_element(role.name())?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for RoleSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<RoleSet, D::Error> {
        struct RoleSetVisitor;

        impl<'de> Visitor<'de> for RoleSetVisitor {
            type Value = RoleSet;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of role names")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<RoleSet, A::Error> {
                let mut set = RoleSet::new();
                while let Some(name) = seq.next_element::<String>()? {
                    set.insert(Role::parse(&name).map_err(de::Error::custom)?);
                }
                Ok(set)
            }
        }

        deserializer.deserialize_seq(RoleSetVisitor)
    }
}
