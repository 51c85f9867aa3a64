use std::collections::VecDeque;

use super::Code;

/// Shortest cycle through any variable node, by BFS from each one. Every
/// cycle of a bipartite graph visits a variable node, so the minimum over
/// all roots is the girth.
pub(super) fn girth(code: &Code) -> Option<usize> {
    let n = code.n();
    let total = n + code.m();
    // node ids: variables 0..n, checks n..n+m
    let neighbors = |u: usize| -> Box<dyn Iterator<Item = usize> + '_> {
        if u < n {
            Box::new(code.cols()[u].iter().map(move |e| n + e.index))
        } else {
            Box::new(code.rows()[u - n].iter().map(|e| e.index))
        }
    };

    let mut best: Option<usize> = None;
    let mut dist = vec![usize::MAX; total];
    let mut parent = vec![usize::MAX; total];
    let mut touched = Vec::new();
    for root in 0..n {
        for &t in &touched {
            dist[t] = usize::MAX;
            parent[t] = usize::MAX;
        }
        touched.clear();
        dist[root] = 0;
        touched.push(root);
        let mut queue = VecDeque::from([root]);
        'bfs: while let Some(u) = queue.pop_front() {
            if let Some(b) = best {
                // cycles closed from here on are at least 2 dist[u] long
                if 2 * dist[u] >= b {
                    break;
                }
            }
            for w in neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    touched.push(w);
                    queue.push_back(w);
                } else if parent[u] != w {
                    let len = dist[u] + dist[w] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                    if len == 4 {
                        break 'bfs;
                    }
                }
            }
        }
        if best == Some(4) {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use crate::codes::Code;
    use crate::galois::Field;

    #[test]
    fn all_ones_two_by_two_has_girth_four() {
        let f = Field::new(1, None).unwrap();
        let code = Code::from_dense(f, &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(code.girth(), Some(4));
    }

    #[test]
    fn tree_has_no_cycle() {
        let f = Field::new(1, None).unwrap();
        let code = Code::from_dense(f, &[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        assert_eq!(code.girth(), None);
    }

    #[test]
    fn hexagon() {
        // three checks, three variables, each variable in two checks: one 6-cycle
        let f = Field::new(1, None).unwrap();
        let code = Code::from_dense(f, &[vec![1, 0, 1], vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        assert_eq!(code.girth(), Some(6));
    }
}
