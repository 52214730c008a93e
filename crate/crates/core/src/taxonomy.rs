//! The social-exclusion attribute taxonomy.
//!
//! A fixed three-level tree: a single root, two branches (identity-based and
//! computing-specific attributes) and eleven leaf attributes. The order of
//! [`AttributeId::ALL`] is the canonical display order used by labels,
//! reports and the heatmap rows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the eleven leaf attributes an exclusionary message can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttributeId {
    Gender,
    SexualOrientation,
    Ethnicity,
    Religion,
    Disability,
    Location,
    EmploymentStatus,
    Age,
    LanguageAbility,
    Software,
    Hardware,
}

/// The two top-level groups of the taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Branch {
    IdentityBased,
    ComputingSpecific,
}

impl AttributeId {
    pub const ALL: [AttributeId; 11] = [
        AttributeId::Gender,
        AttributeId::SexualOrientation,
        AttributeId::Ethnicity,
        AttributeId::Religion,
        AttributeId::Disability,
        AttributeId::Location,
        AttributeId::EmploymentStatus,
        AttributeId::Age,
        AttributeId::LanguageAbility,
        AttributeId::Software,
        AttributeId::Hardware,
    ];

    pub fn branch(self) -> Branch {
        match self {
            AttributeId::Software | AttributeId::Hardware => Branch::ComputingSpecific,
            _ => Branch::IdentityBased,
        }
    }

    pub fn is_identity(self) -> bool {
        self.branch() == Branch::IdentityBased
    }

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Stable machine name, identical to the serialized form.
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeId::Gender => "Gender",
            AttributeId::SexualOrientation => "SexualOrientation",
            AttributeId::Ethnicity => "Ethnicity",
            AttributeId::Religion => "Religion",
            AttributeId::Disability => "Disability",
            AttributeId::Location => "Location",
            AttributeId::EmploymentStatus => "EmploymentStatus",
            AttributeId::Age => "Age",
            AttributeId::LanguageAbility => "LanguageAbility",
            AttributeId::Software => "Software",
            AttributeId::Hardware => "Hardware",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            AttributeId::Gender => "Gender",
            AttributeId::SexualOrientation => "Sexual orientation",
            AttributeId::Ethnicity => "Ethnicity",
            AttributeId::Religion => "Religion",
            AttributeId::Disability => "Disability",
            AttributeId::Location => "Location",
            AttributeId::EmploymentStatus => "Employment status",
            AttributeId::Age => "Age",
            AttributeId::LanguageAbility => "Language ability",
            AttributeId::Software => "Software",
            AttributeId::Hardware => "Hardware",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            AttributeId::Gender => "A person's sex or the gender they identify with.",
            AttributeId::SexualOrientation => {
                "Who a person is attracted to, e.g. gay, lesbian or bisexual identities."
            }
            AttributeId::Ethnicity => "The ethnic or national group a person belongs to.",
            AttributeId::Religion => "The faith a person follows or is associated with.",
            AttributeId::Disability => "A physical or mental condition that limits participation.",
            AttributeId::Location => "The country or region a person comes from.",
            AttributeId::EmploymentStatus => "Whether a person has a job, and of what kind.",
            AttributeId::Age => "A person's age or age group.",
            AttributeId::LanguageAbility => {
                "How well a person speaks or writes the language of the conversation."
            }
            AttributeId::Software => {
                "Specific software products, stacks or practices, and the skills of their users."
            }
            AttributeId::Hardware => "Specific hardware products or platforms.",
        }
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown attribute `{0}`")]
pub struct UnknownAttribute(pub String);

impl FromStr for AttributeId {
    type Err = UnknownAttribute;

    /// Accepts the machine name, the display name, or either in any case
    /// with spaces, dashes or underscores between words.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, ' ' | '-' | '_'))
            .flat_map(char::to_lowercase)
            .collect();
        AttributeId::ALL
            .into_iter()
            .find(|a| a.as_str().to_lowercase() == key)
            .ok_or_else(|| UnknownAttribute(s.to_string()))
    }
}

impl Branch {
    pub const ALL: [Branch; 2] = [Branch::IdentityBased, Branch::ComputingSpecific];

    pub fn display_name(self) -> &'static str {
        match self {
            Branch::IdentityBased => "Identity-based attributes",
            Branch::ComputingSpecific => "Computing-specific attributes",
        }
    }

    pub fn attributes(self) -> impl Iterator<Item = AttributeId> {
        AttributeId::ALL
            .into_iter()
            .filter(move |a| a.branch() == self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeNode {
    pub id: AttributeId,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchNode {
    pub id: Branch,
    pub name: String,
    pub attributes: Vec<AttributeNode>,
}

/// Serializable view of the whole tree, as served over HTTP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub root: String,
    pub branches: Vec<BranchNode>,
}

impl Taxonomy {
    pub fn new() -> Self {
        let branches = Branch::ALL
            .into_iter()
            .map(|b| BranchNode {
                id: b,
                name: b.display_name().to_string(),
                attributes: b
                    .attributes()
                    .map(|a| AttributeNode {
                        id: a,
                        name: a.display_name().to_string(),
                        description: a.description().to_string(),
                    })
                    .collect(),
            })
            .collect();
        Taxonomy {
            root: "Social exclusion attributes in software engineering".to_string(),
            branches,
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &AttributeNode> {
        self.branches.iter().flat_map(|b| b.attributes.iter())
    }

    /// Root, branch, leaf.
    pub fn depth(&self) -> usize {
        if self.branches.is_empty() {
            1
        } else if self.branches.iter().all(|b| b.attributes.is_empty()) {
            2
        } else {
            3
        }
    }
}

impl Default for Taxonomy {
    fn default() -> Self {
        Self::new()
    }
}
