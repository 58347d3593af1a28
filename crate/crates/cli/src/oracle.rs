//! Naive reference solvers. Each answers its question by the most
//! direct exhaustive search that exists and shares no code with the
//! main solvers, so the two sides can cross-check each other in the
//! suite and in the acceptance tests. All are exponential; they refuse
//! inputs large enough to hurt.

use incompact_core::family::Family;
use incompact_core::graph::Graph;

fn masks(g: &Graph) -> Vec<u32> {
    (0..g.node_count())
        .map(|i| g.neighbours(i).iter().fold(0u32, |m, &j| m | 1 << j))
        .collect()
}

fn colourable(adj: &[u32], colours: &mut [u32], i: usize, k: u32) -> bool {
    if i == adj.len() {
        return true;
    }
    'palette: for c in 0..k {
        for j in 0..i {
            if adj[i] >> j & 1 == 1 && colours[j] == c {
                continue 'palette;
            }
        }
        colours[i] = c;
        if colourable(adj, colours, i + 1, k) {
            return true;
        }
    }
    false
}

/// Is there a proper colouring with at most `k` colours? Plain
/// node-by-node assignment enumeration.
pub fn k_colourable_brute(g: &Graph, k: u32) -> bool {
    let n = g.node_count();
    if n == 0 {
        return true;
    }
    assert!(n <= 16, "assignment enumeration is for tiny graphs");
    if k == 0 {
        return false;
    }
    colourable(&masks(g), &mut vec![0; n], 0, k)
}

/// Least number of colours in any proper colouring, by trying every
/// assignment with `k = 1, 2, ...` colours until one fits.
pub fn chromatic_brute(g: &Graph) -> u32 {
    let n = g.node_count();
    if n == 0 {
        return 0;
    }
    assert!(n <= 16, "assignment enumeration is for tiny graphs");
    (1..=n as u32)
        .find(|&k| colourable(&masks(g), &mut vec![0; n], 0, k))
        .expect("n colours always suffice for n nodes")
}

/// Colouring number by definition: the minimum over all node orders of
/// one plus the largest number of already-placed neighbours any node
/// sees. Zero for the empty graph, matching the fast solver's
/// convention.
pub fn colouring_number_brute(g: &Graph) -> u32 {
    let n = g.node_count();
    if n == 0 {
        return 0;
    }
    assert!(n <= 9, "order enumeration is factorial; keep graphs tiny");
    let adj = masks(g);
    let mut best = n as u32 - 1;
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n];
    min_back_degree(&adj, &mut order, &mut used, &mut best);
    best + 1
}

fn min_back_degree(adj: &[u32], order: &mut Vec<usize>, used: &mut [bool], best: &mut u32) {
    if order.len() == used.len() {
        let mut placed = 0u32;
        let mut worst = 0;
        for &v in order.iter() {
            worst = worst.max((adj[v] & placed).count_ones());
            placed |= 1 << v;
        }
        *best = (*best).min(worst);
        return;
    }
    for v in 0..used.len() {
        if !used[v] {
            used[v] = true;
            order.push(v);
            min_back_degree(adj, order, used, best);
            order.pop();
            used[v] = false;
        }
    }
}

/// Transversal existence by trying every choice of pairwise distinct
/// values, one member at a time. Panics on out-of-range member indices;
/// callers pass validated subfamilies.
pub fn has_transversal_brute(fam: &Family, sub: &[usize]) -> bool {
    fn choose(ranges: &[Vec<u32>], taken: &mut Vec<u32>) -> bool {
        let i = taken.len();
        if i == ranges.len() {
            return true;
        }
        for &v in &ranges[i] {
            if !taken.contains(&v) {
                taken.push(v);
                if choose(ranges, taken) {
                    return true;
                }
                taken.pop();
            }
        }
        false
    }
    let ranges: Vec<Vec<u32>> = sub
        .iter()
        .map(|&i| fam.range(i).into_iter().collect())
        .collect();
    choose(&ranges, &mut Vec::new())
}
