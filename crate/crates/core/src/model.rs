use std::collections::BTreeMap;
use std::sync::Arc;

use crate::distribution::{Distribution, SpareSpec};
use crate::error::{Error, Result};
use crate::expr::{BlockId, BlockIndex, CompiledExpr, Expr};

/// Law attached to a declared block.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockLaw {
    Basic(Distribution),
    Spare(SpareSpec),
}

/// Named blocks with their laws and the structure function over them.
#[derive(Clone, Debug)]
pub struct DrbdModel {
    name: String,
    blocks: BTreeMap<BlockId, BlockLaw>,
    root: Expr,
    index: Arc<BlockIndex>,
}

impl DrbdModel {
    /// Validates that every reference of `root` is declared with the right
    /// kind: plain references to basic blocks, spare-construct references
    /// to spares.
    pub fn new(name: impl Into<String>, blocks: BTreeMap<BlockId, BlockLaw>, root: Expr) -> Result<Self> {
        root.check_well_formed()?;
        let mut problem = None;
        root.visit_refs(&mut |id, as_spare| {
            if problem.is_some() {
                return;
            }
            problem = match (blocks.get(id), as_spare) {
                (None, _) => Some(format!("unknown block `{id}`")),
                (Some(BlockLaw::Spare(_)), false) => {
                    Some(format!("spare `{id}` referenced outside a spare construct"))
                }
                (Some(BlockLaw::Basic(_)), true) => {
                    Some(format!("block `{id}` used as a spare but is not declared as one"))
                }
                _ => None,
            };
        });
        if let Some(msg) = problem {
            return Err(Error::Model(msg));
        }
        let index = Arc::new(BlockIndex::new(blocks.keys().cloned())?);
        Ok(DrbdModel { name: name.into(), blocks, root, index })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn blocks(&self) -> &BTreeMap<BlockId, BlockLaw> {
        &self.blocks
    }

    pub fn block(&self, id: &str) -> Option<&BlockLaw> {
        self.blocks.get(id)
    }

    /// Slot layout of this model's samples (blocks in id order).
    pub fn index(&self) -> &Arc<BlockIndex> {
        &self.index
    }

    /// Same blocks, different structure function.
    pub fn with_root(&self, root: Expr) -> Result<Self> {
        DrbdModel::new(self.name.clone(), self.blocks.clone(), root)
    }

    /// Resolves `e` against this model's sample layout.
    pub fn compile(&self, e: &Expr) -> Result<CompiledExpr> {
        CompiledExpr::compile_for(e, &self.index, &|id| {
            matches!(self.blocks.get(id), Some(BlockLaw::Spare(_)))
        })
    }
}

impl PartialEq for DrbdModel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.blocks == other.blocks && self.root == other.root
    }
}
