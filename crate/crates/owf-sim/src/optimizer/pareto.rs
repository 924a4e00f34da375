//! Pareto machinery for two minimized objectives: dominance, fast
//! non-dominated sorting, crowding distance, staircase hypervolume and
//! compromise selection.

/// True when `a` dominates `b`: no worse in both objectives, strictly better
/// in at least one. Both objectives are minimized.
pub fn dominates(a: [f64; 2], b: [f64; 2]) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// Fast non-dominated sort: partitions point indices into fronts, best
/// first. Every index appears in exactly one front.
pub fn non_dominated_fronts(points: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in (p + 1)..n {
            if dominates(points[p], points[q]) {
                dominated_by[p].push(q);
                domination_count[q] += 1;
            } else if dominates(points[q], points[p]) {
                dominated_by[q].push(p);
                domination_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of `front`, in the order given. Boundary
/// points on each objective get infinity; interior points sum the normalized
/// gaps between their neighbours.
pub fn crowding_distances(points: &[[f64; 2]], front: &[usize]) -> Vec<f64> {
    let m = front.len();
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    let mut distance = vec![0.0f64; m];
    for obj in 0..2 {
        // Positions into `front`, ordered by this objective; index breaks ties
        // deterministically.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            points[front[a]][obj]
                .partial_cmp(&points[front[b]][obj])
                .expect("objectives are finite")
                .then(front[a].cmp(&front[b]))
        });
        let lo = points[front[order[0]]][obj];
        let hi = points[front[order[m - 1]]][obj];
        distance[order[0]] = f64::INFINITY;
        distance[order[m - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..m - 1 {
                let gap = points[front[order[w + 1]]][obj] - points[front[order[w - 1]]][obj];
                distance[order[w]] += gap / (hi - lo);
            }
        }
    }
    distance
}

/// Hypervolume dominated by `points` relative to `reference`, both objectives
/// minimized. Points that do not strictly better the reference in both
/// objectives contribute nothing.
pub fn hypervolume(points: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    let mut inside: Vec<[f64; 2]> = points
        .iter()
        .copied()
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .collect();
    if inside.is_empty() {
        return 0.0;
    }
    // Staircase over the non-dominated subset, swept in ascending obj1.
    inside.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap().then(a[1].partial_cmp(&b[1]).unwrap()));
    let mut volume = 0.0;
    let mut prev_y = reference[1];
    for p in inside {
        if p[1] < prev_y {
            volume += (reference[0] - p[0]) * (prev_y - p[1]);
            prev_y = p[1];
        }
    }
    volume
}

/// Index of the compromise point: each objective is min-max normalized over
/// the set and the point closest to the normalized ideal `(0, 0)` wins.
/// Ties go to the smaller first objective, then to the earlier index.
/// `None` only for an empty set.
pub fn compromise_index(points: &[[f64; 2]]) -> Option<usize> {
    if points.is_empty() {
        return None;
    }
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in points {
        for o in 0..2 {
            min[o] = min[o].min(p[o]);
            max[o] = max[o].max(p[o]);
        }
    }
    let norm = |value: f64, o: usize| -> f64 {
        if max[o] > min[o] {
            (value - min[o]) / (max[o] - min[o])
        } else {
            0.0
        }
    };
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = norm(p[0], 0).hypot(norm(p[1], 1));
        if d < best_dist || (d == best_dist && p[0] < points[best][0]) {
            best = i;
            best_dist = d;
        }
    }
    Some(best)
}
