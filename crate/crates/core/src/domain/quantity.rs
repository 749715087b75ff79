use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Cargo amount in quarter standard pallets.
///
/// One box is the smallest unit (a quarter pallet), so every demand in the
/// model is an exact integer in this unit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Quarters(pub u32);

impl Quarters {
    pub const ZERO: Quarters = Quarters(0);

    pub const fn from_pallets(pallets: u32) -> Self {
        Quarters(pallets * 4)
    }

    /// Standard-pallet equivalents. Exact: every value is a multiple of 0.25.
    pub fn as_pallets(self) -> f64 {
        f64::from(self.0) / 4.0
    }

    /// Parses a standard-pallet amount that must be a multiple of 0.25.
    pub fn try_from_pallets(pallets: f64) -> Option<Self> {
        if !(pallets >= 0.0) || pallets > f64::from(u32::MAX / 4) {
            return None;
        }
        let q = pallets * 4.0;
        let whole = q as u32;
        if f64::from(whole) == q {
            Some(Quarters(whole))
        } else {
            None
        }
    }
}

impl Add for Quarters {
    type Output = Quarters;
    fn add(self, rhs: Self) -> Self {
        Quarters(self.0 + rhs.0)
    }
}

impl AddAssign for Quarters {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for Quarters {
    type Output = Quarters;
    fn sub(self, rhs: Self) -> Self {
        Quarters(self.0 - rhs.0)
    }
}

impl SubAssign for Quarters {
    fn sub_assign(&mut self, rhs: Self) {
        self.0 -= rhs.0;
    }
}

impl Sum for Quarters {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Quarters::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Quarters> for Quarters {
    fn sum<I: Iterator<Item = &'a Self>>(iter: I) -> Self {
        iter.copied().sum()
    }
}

impl fmt::Display for Quarters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / 4;
        match self.0 % 4 {
            0 => write!(f, "{whole}"),
            1 => write!(f, "{whole}.25"),
            2 => write!(f, "{whole}.5"),
            _ => write!(f, "{whole}.75"),
        }
    }
}

/// Order quantity split by pallet type.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PalletQuantity {
    pub standard: u32,
    pub small: u32,
    pub boxes: u32,
}

impl PalletQuantity {
    pub const fn new(standard: u32, small: u32, boxes: u32) -> Self {
        Self { standard, small, boxes }
    }

    pub fn demand(&self) -> Quarters {
        Quarters(self.standard * 4 + self.small * 2 + self.boxes)
    }

    pub fn is_empty(&self) -> bool {
        self.standard == 0 && self.small == 0 && self.boxes == 0
    }

    pub fn item_count(&self) -> u32 {
        self.standard + self.small + self.boxes
    }
}

/// Standard-pallet equivalents: `standard + small / 2 + boxes / 4`.
pub fn demand(q: &PalletQuantity) -> Quarters {
    q.demand()
}
