//! Graph structures that generate EC&R assignments: trees when m = 1 and
//! vertically connected forests when m > 1.

mod forests;
mod trees;

pub use forests::{
    enumerate_forests, forest_labels, label_forest, validate_forest, ForestCondition, ForestEnumOptions,
    ForestStructure, ForestViolation, Member,
};
pub use trees::{
    enumerate_trees, enumerate_trees_with, feasible_partitions, tree_node_sets, tree_to_assignment,
    tree_to_assignment_case, Endpoint, TreeCase, TreeEnumOptions, TreeStructure,
};

use crate::network::ArcId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("case {requested:?} needs the {needed:?} of arc {anchor} in the tree")]
    CaseMismatch { anchor: ArcId, requested: TreeCase, needed: Endpoint },
    #[error("member {member} would get both labels")]
    LabelConflict { member: Member },
    #[error("member {member} receives no label")]
    Unreached { member: Member },
    #[error("invalid structure: {0}")]
    Invalid(String),
}
