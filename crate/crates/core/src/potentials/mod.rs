//! Concrete clique potentials used in image-segmentation energies.

mod edge;
mod region;
mod square;
mod table;
mod unary;

use std::sync::Arc;

pub use edge::EdgeCutPotential;
pub use region::{decreasing_isotonic, RegionPotential};
pub use square::SquarePotential;
pub use table::TablePotential;
pub use unary::UnaryPotential;

use crate::set_function::{PotentialKind, SetFunction};

/// One summand `f_i` of a decomposable function.
#[derive(Debug, Clone)]
pub enum Potential {
    Unary(UnaryPotential),
    EdgeCut(EdgeCutPotential),
    Square(SquarePotential),
    Region(RegionPotential),
    Table(TablePotential),
    Custom(Arc<dyn SetFunction>),
}

impl Potential {
    pub fn as_set_function(&self) -> &dyn SetFunction {
        match self {
            Potential::Unary(p) => p,
            Potential::EdgeCut(p) => p,
            Potential::Square(p) => p,
            Potential::Region(p) => p,
            Potential::Table(p) => p,
            Potential::Custom(p) => p.as_ref(),
        }
    }
}

impl SetFunction for Potential {
    fn support(&self) -> &[usize] {
        self.as_set_function().support()
    }

    fn kind(&self) -> PotentialKind {
        self.as_set_function().kind()
    }

    fn eval_local(&self, members: &[bool]) -> f64 {
        self.as_set_function().eval_local(members)
    }

    fn chain_values(&self, order: &[usize]) -> Vec<f64> {
        self.as_set_function().chain_values(order)
    }

    fn specialized_min_norm(&self, w: &[f64]) -> Option<Vec<f64>> {
        self.as_set_function().specialized_min_norm(w)
    }
}

macro_rules! impl_from {
    ($($variant:ident => $ty:ty),*) => {
        $(impl From<$ty> for Potential {
            fn from(p: $ty) -> Self {
                Potential::$variant(p)
            }
        })*
    };
}

impl_from!(
    Unary => UnaryPotential,
    EdgeCut => EdgeCutPotential,
    Square => SquarePotential,
    Region => RegionPotential,
    Table => TablePotential
);
