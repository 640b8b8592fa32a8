//! Hopcroft–Karp maximum bipartite matching over borrowed adjacency slices.

use std::collections::VecDeque;

const FREE: u32 = u32::MAX;
const INF: u32 = u32::MAX;

/// Maximum matching of the bipartite graph whose left vertex `i` is adjacent
/// to the right vertices `adj[i]`. Returns `mate[i]`, the right partner of
/// each left vertex or `None`.
pub fn maximum_matching(adj: &[&[u32]], n_right: usize) -> Vec<Option<u32>> {
    let n_left = adj.len();
    let mut mate_l = vec![FREE; n_left];
    let mut mate_r = vec![FREE; n_right];
    let mut dist = vec![INF; n_left];
    let mut queue = VecDeque::with_capacity(n_left);

    // greedy warm-up inside a single solve
    for (i, nbrs) in adj.iter().enumerate() {
        if let Some(&j) = nbrs.iter().find(|&&j| mate_r[j as usize] == FREE) {
            mate_l[i] = j;
            mate_r[j as usize] = i as u32;
        }
    }

    loop {
        // layered BFS from free left vertices
        queue.clear();
        for i in 0..n_left {
            if mate_l[i] == FREE {
                dist[i] = 0;
                queue.push_back(i as u32);
            } else {
                dist[i] = INF;
            }
        }
        let mut found = false;
        while let Some(i) = queue.pop_front() {
            let di = dist[i as usize];
            for &j in adj[i as usize] {
                let k = mate_r[j as usize];
                if k == FREE {
                    found = true;
                } else if dist[k as usize] == INF {
                    dist[k as usize] = di + 1;
                    queue.push_back(k);
                }
            }
        }
        if !found {
            break;
        }
        let mut augmented = false;
        for i in 0..n_left {
            if mate_l[i] == FREE && augment(i, adj, &mut mate_l, &mut mate_r, &mut dist) {
                augmented = true;
            }
        }
        if !augmented {
            break;
        }
    }
    mate_l
        .into_iter()
        .map(|j| (j != FREE).then_some(j))
        .collect()
}

/// Iterative DFS along the BFS layers; flips the path on success.
fn augment(
    root: usize,
    adj: &[&[u32]],
    mate_l: &mut [u32],
    mate_r: &mut [u32],
    dist: &mut [u32],
) -> bool {
    // stack of (left vertex, next edge position)
    let mut stack: Vec<(u32, usize)> = vec![(root as u32, 0)];
    while let Some(&mut (i, ref mut pos)) = stack.last_mut() {
        let nbrs = adj[i as usize];
        if *pos >= nbrs.len() {
            dist[i as usize] = INF;
            stack.pop();
            continue;
        }
        let j = nbrs[*pos];
        *pos += 1;
        let k = mate_r[j as usize];
        if k == FREE {
            // augmenting path found: flip along the stack
            let mut right = j;
            while let Some((left, _)) = stack.pop() {
                let prev = mate_l[left as usize];
                mate_l[left as usize] = right;
                mate_r[right as usize] = left;
                right = prev;
            }
            return true;
        }
        if dist[k as usize] == dist[i as usize] + 1 {
            stack.push((k, 0));
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn size(m: &[Option<u32>]) -> usize {
        m.iter().flatten().count()
    }

    fn brute_max(adj: &[Vec<u32>], n_right: usize) -> usize {
        fn go(i: usize, adj: &[Vec<u32>], used: &mut Vec<bool>) -> usize {
            if i == adj.len() {
                return 0;
            }
            let mut best = go(i + 1, adj, used);
            for &j in &adj[i] {
                if !used[j as usize] {
                    used[j as usize] = true;
                    best = best.max(1 + go(i + 1, adj, used));
                    used[j as usize] = false;
                }
            }
            best
        }
        go(0, adj, &mut vec![false; n_right])
    }

    #[test]
    fn needs_augmenting_path() {
        // greedy picks 0-0, then 1 must reroute 0 to 1
        let adj: Vec<Vec<u32>> = vec![vec![0, 1], vec![0]];
        let refs: Vec<&[u32]> = adj.iter().map(Vec::as_slice).collect();
        let m = maximum_matching(&refs, 2);
        assert_eq!(m, vec![Some(1), Some(0)]);
    }

    #[test]
    fn agrees_with_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let nl = rng.random_range(1..7);
            let nr = rng.random_range(1..7);
            let p = rng.random::<f64>();
            let adj: Vec<Vec<u32>> = (0..nl)
                .map(|_| (0..nr as u32).filter(|_| rng.random_bool(p)).collect())
                .collect();
            let refs: Vec<&[u32]> = adj.iter().map(Vec::as_slice).collect();
            let m = maximum_matching(&refs, nr);
            assert_eq!(size(&m), brute_max(&adj, nr));
            let mut seen = vec![false; nr];
            for (i, j) in m.iter().enumerate() {
                if let Some(j) = j {
                    assert!(adj[i].contains(j));
                    assert!(!std::mem::replace(&mut seen[*j as usize], true));
                }
            }
        }
    }
}
