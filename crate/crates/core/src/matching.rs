//! Exact bipartite matching primitives used by the diagram distances.

/// Minimum-cost perfect assignment on a square cost matrix (row-major,
/// `n × n`), by the Hungarian method with row/column potentials, O(n³).
///
/// Returns `(total_cost, col_of_row)`.
pub fn min_cost_assignment(cost: &[f64], n: usize) -> (f64, Vec<usize>) {
    assert_eq!(cost.len(), n * n, "cost matrix must be n × n");
    if n == 0 {
        return (0.0, Vec::new());
    }
    // 1-based arrays; index 0 is the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let c = |i: usize, j: usize| cost[(i - 1) * n + (j - 1)];

    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = c(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut col_of_row = vec![0usize; n];
    for j in 1..=n {
        col_of_row[row_of_col[j] - 1] = j - 1;
    }
    // Sum the original entries rather than trusting the potentials.
    let total = col_of_row
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * n + j])
        .sum();
    (total, col_of_row)
}

/// Whether a bipartite graph with `n` left and `n` right vertices has a
/// perfect matching. `adj[i]` lists the right neighbours of left vertex `i`.
/// Hopcroft–Karp.
pub fn has_perfect_matching(adj: &[Vec<usize>], n: usize) -> bool {
    const FREE: usize = usize::MAX;
    let mut match_l = vec![FREE; n];
    let mut match_r = vec![FREE; n];
    let mut dist = vec![0usize; n];
    let mut matched = 0;

    loop {
        // BFS layering from free left vertices.
        let mut queue = std::collections::VecDeque::new();
        for i in 0..n {
            if match_l[i] == FREE {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                let k = match_r[j];
                if k == FREE {
                    found = true;
                } else if dist[k] == usize::MAX {
                    dist[k] = dist[i] + 1;
                    queue.push_back(k);
                }
            }
        }
        if !found {
            break;
        }
        for i in 0..n {
            if match_l[i] == FREE && augment(i, adj, &mut match_l, &mut match_r, &mut dist) {
                matched += 1;
            }
        }
    }
    matched == n
}

fn augment(
    i: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &j in &adj[i] {
        let k = match_r[j];
        let ok = k == usize::MAX
            || (dist[k] == dist[i].wrapping_add(1) && augment(k, adj, match_l, match_r, dist));
        if ok {
            match_l[i] = j;
            match_r[j] = i;
            return true;
        }
    }
    dist[i] = usize::MAX;
    false
}
