use super::{ItemId, KnapsackError, KnapsackInstance, PackingResult};

pub const BRUTE_FORCE_MAX_ITEMS: usize = 20;

/// Exhaustive 0-1 oracle. Walks all subsets in Gray-code order so each step
/// updates the running size and value with a single item.
pub fn solve_brute_force(instance: &KnapsackInstance) -> Result<PackingResult, KnapsackError> {
    let n = instance.len();
    if n > BRUTE_FORCE_MAX_ITEMS {
        return Err(KnapsackError::OracleLimit {
            items: n,
            limit: BRUTE_FORCE_MAX_ITEMS,
        });
    }
    let order = instance.indices_by_id();
    let sizes: Vec<u64> = order.iter().map(|&i| instance.items()[i].size).collect();
    let values: Vec<u64> = order.iter().map(|&i| instance.items()[i].value).collect();
    let cap = instance.capacity();

    let mut mask: u32 = 0;
    let mut size = 0u64;
    let mut value = 0u64;
    let mut best_mask: u32 = 0;
    let mut best_value = 0u64;
    for step in 1u32..(1u32 << n) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        if mask >> bit & 1 == 1 {
            size += sizes[bit];
            value += values[bit];
        } else {
            size -= sizes[bit];
            value -= values[bit];
        }
        if size > cap {
            continue;
        }
        if value > best_value || (value == best_value && lex_smaller(mask, best_mask)) {
            best_value = value;
            best_mask = mask;
        }
    }

    let picked: Vec<ItemId> = (0..n)
        .filter(|&b| best_mask >> b & 1 == 1)
        .map(|b| instance.items()[order[b]].id)
        .collect();
    Ok(instance.whole_packing(picked))
}

/// Whether the id list encoded by `a` sorts before the one encoded by `b`
/// (bit j is the j-th smallest id; a proper prefix sorts first).
fn lex_smaller(a: u32, b: u32) -> bool {
    if a == b {
        return false;
    }
    let d = (a ^ b).trailing_zeros();
    let (has, lacks) = if a >> d & 1 == 1 { (a, b) } else { (b, a) };
    let lacks_is_prefix = lacks >> d == 0;
    // the list lacking `d` is smaller only when it ends before `d`
    let smaller = if lacks_is_prefix { lacks } else { has };
    smaller == a
}
