//! Oracles shared by the integration and acceptance suites. Nothing here
//! calls into the library's geometry or energy code.
#![allow(dead_code)]

pub const BASIS: [[i32; 3]; 12] = [
    [1, 1, 0],
    [-1, -1, 0],
    [-1, 1, 0],
    [1, -1, 0],
    [0, 1, 1],
    [0, 1, -1],
    [1, 0, 1],
    [1, 0, -1],
    [0, -1, 1],
    [-1, 0, 1],
    [0, -1, -1],
    [-1, 0, -1],
];

pub fn sq(a: [i32; 3], b: [i32; 3]) -> i32 {
    (0..3).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum()
}

/// Largest number of non-consecutive contacts over all self-avoiding walks
/// of `n` residues. Every walk is equivalent under a lattice rotation to one
/// whose first step is `(1, 1, 0)`, so only those are enumerated.
pub fn max_contacts(n: usize) -> usize {
    let size = 2 * n + 3;
    let off = n as i32 + 1;
    let idx = |p: [i32; 3]| (((p[0] + off) as usize * size) + (p[1] + off) as usize) * size + (p[2] + off) as usize;
    let mut grid = vec![false; size * size * size];
    let mut path = vec![[0i32; 3]; n];
    path[1] = BASIS[0];
    grid[idx(path[0])] = true;
    grid[idx(path[1])] = true;
    let mut best = 0;
    fn dfs(
        k: usize,
        n: usize,
        contacts: usize,
        path: &mut Vec<[i32; 3]>,
        grid: &mut Vec<bool>,
        idx: &dyn Fn([i32; 3]) -> usize,
        best: &mut usize,
    ) {
        if k == n {
            *best = (*best).max(contacts);
            return;
        }
        let prev = path[k - 1];
        for d in BASIS {
            let p = [prev[0] + d[0], prev[1] + d[1], prev[2] + d[2]];
            let i = idx(p);
            if grid[i] {
                continue;
            }
            // occupied neighbours other than the predecessor are new contacts
            let added = BASIS
                .iter()
                .filter(|e| grid[idx([p[0] + e[0], p[1] + e[1], p[2] + e[2]])])
                .count()
                - 1;
            grid[i] = true;
            path[k] = p;
            dfs(k + 1, n, contacts + added, path, grid, idx, best);
            grid[i] = false;
        }
    }
    dfs(2, n, 0, &mut path, &mut grid, &idx, &mut best);
    best
}

/// Pairwise energy by a direct double loop over coordinates.
pub fn brute_energy(coords: &[[i32; 3]], pair: impl Fn(usize, usize) -> f64) -> f64 {
    let mut e = 0.0;
    for i in 0..coords.len() {
        for j in 0..coords.len() {
            if j > i + 1 && sq(coords[i], coords[j]) == 2 {
                e += pair(i, j);
            }
        }
    }
    e
}

/// 20x20 table read straight from the bundled CSV, in file order.
pub fn bundled_table() -> (Vec<char>, Vec<Vec<f64>>) {
    let text = include_str!("../../data/mj1996_contact.csv");
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<char> = lines.next().unwrap().split(',').map(|s| s.trim().chars().next().unwrap()).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect()).collect();
    (header, rows)
}
