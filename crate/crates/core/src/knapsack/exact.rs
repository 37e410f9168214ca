use super::{gcd, Item, ItemId, KnapsackError, KnapsackInstance, PackingResult, DEFAULT_MAX_TABLE_CELLS};

/// Exact 0-1 optimum by dynamic programming over capacity.
pub fn solve_exact(instance: &KnapsackInstance) -> Result<PackingResult, KnapsackError> {
    solve_exact_with(instance, DEFAULT_MAX_TABLE_CELLS)
}

/// [`solve_exact`] with an explicit bound on `items * (capacity + 1)` table cells.
///
/// Sizes and capacity are first divided by the gcd of all sizes, which keeps
/// gas-denominated instances (sizes in multiples of 1000 gas) tractable.
pub fn solve_exact_with(instance: &KnapsackInstance, max_cells: u64) -> Result<PackingResult, KnapsackError> {
    let order = instance.indices_by_id();
    let items: Vec<&Item> = order.iter().map(|&i| &instance.items()[i]).collect();
    let values: Vec<u64> = items.iter().map(|it| it.value).collect();
    let picked = max_value_subset(&items, &values, instance.capacity(), max_cells)?;
    Ok(instance.whole_packing(picked))
}

/// Maximum achievable fill (the subset-sum problem); item values are ignored
/// by the optimisation but reported in `total_value`.
pub fn subset_sum_pack(instance: &KnapsackInstance) -> Result<PackingResult, KnapsackError> {
    subset_sum_pack_with(instance, DEFAULT_MAX_TABLE_CELLS)
}

pub fn subset_sum_pack_with(instance: &KnapsackInstance, max_cells: u64) -> Result<PackingResult, KnapsackError> {
    let order = instance.indices_by_id();
    let items: Vec<&Item> = order.iter().map(|&i| &instance.items()[i]).collect();
    let sizes: Vec<u64> = items.iter().map(|it| it.size).collect();
    let picked = max_value_subset(&items, &sizes, instance.capacity(), max_cells)?;
    Ok(instance.whole_packing(picked))
}

/// Core DP. `items` must be sorted by id; `values[i]` is the objective weight
/// of `items[i]`. Returns the chosen ids in ascending id order.
fn max_value_subset(
    items: &[&Item],
    values: &[u64],
    capacity: u64,
    max_cells: u64,
) -> Result<Vec<ItemId>, KnapsackError> {
    let unit = items.iter().fold(0, |g, it| gcd(g, it.size)).max(1);
    let cap = capacity / unit;
    let n = items.len();
    let cells = n as u128 * (u128::from(cap) + 1);
    if cells > u128::from(max_cells) {
        return Err(KnapsackError::InstanceTooLarge {
            cells,
            limit: max_cells,
        });
    }
    let cap = cap as usize;
    let width = cap + 1;

    // best[c] holds the optimum over the suffix of items already processed;
    // keep bit (i, c) records that taking item i is optimal for suffix i at c.
    let mut best = vec![0u64; width];
    let mut keep = BitTable::new(n, width);
    for i in (0..n).rev() {
        let w = (items[i].size / unit) as usize;
        if w > cap {
            continue;
        }
        let v = values[i];
        for c in (w..=cap).rev() {
            let with = best[c - w] + v;
            if with >= best[c] {
                best[c] = with;
                keep.set(i, c);
            }
        }
    }

    // Forward reconstruction picks the smallest id that can still complete an
    // optimal set, and stops as soon as nothing more is needed; this yields
    // the lexicographically smallest optimal id list.
    let mut picked = Vec::new();
    let mut c = cap;
    let mut remaining = best[cap];
    for i in 0..n {
        if remaining == 0 {
            break;
        }
        if keep.get(i, c) {
            picked.push(items[i].id);
            c -= (items[i].size / unit) as usize;
            remaining -= values[i];
        }
    }
    Ok(picked)
}

struct BitTable {
    width: usize,
    words: Vec<u64>,
}

impl BitTable {
    fn new(rows: usize, width: usize) -> Self {
        let bits = rows * width;
        Self {
            width,
            words: vec![0; bits.div_ceil(64)],
        }
    }

    fn set(&mut self, row: usize, col: usize) {
        let bit = row * self.width + col;
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    fn get(&self, row: usize, col: usize) -> bool {
        let bit = row * self.width + col;
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }
}
