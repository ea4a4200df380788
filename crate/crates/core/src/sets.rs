//! Small helpers over [`FixedBitSet`], which is used for every state set.
//!
//! Color sets are `u64` masks (bit `c` set iff color `c` is present), so colors
//! are limited to `0..64`.

use fixedbitset::FixedBitSet;

pub type StateSet = FixedBitSet;

/// Bit mask of a set of colors.
pub type ColorSet = u64;

pub fn set_of(n: usize, items: impl IntoIterator<Item = u32>) -> StateSet {
    let mut s = FixedBitSet::with_capacity(n);
    for i in items {
        s.insert(i as usize);
    }
    s
}

pub fn singleton(n: usize, i: u32) -> StateSet {
    set_of(n, [i])
}

pub fn members(s: &StateSet) -> Vec<u32> {
    s.ones().map(|i| i as u32).collect()
}

pub fn color_bit(c: u32) -> ColorSet {
    debug_assert!(c < 64, "colors are limited to 0..64");
    1u64 << c
}

pub fn colors_of(mask: ColorSet) -> impl Iterator<Item = u32> {
    (0..64u32).filter(move |c| mask >> c & 1 == 1)
}

/// Minimum color of a non-empty color set.
pub fn min_color(mask: ColorSet) -> Option<u32> {
    (mask != 0).then(|| mask.trailing_zeros())
}

pub fn fmt_color_set(mask: ColorSet) -> String {
    let items: Vec<String> = colors_of(mask).map(|c| c.to_string()).collect();
    format!("{{{}}}", items.join(","))
}
