//! Coset enumeration (HLT strategy with coincidence processing).

const UNDEF: u32 = u32::MAX;

struct Table {
    rows: Vec<Vec<u32>>,
    parent: Vec<u32>,
    inv: Vec<usize>,
    live: usize,
    limit: usize,
    overflow: bool,
}

impl Table {
    fn rep(&mut self, mut k: u32) -> u32 {
        let mut root = k;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[k as usize] != root {
            let next = self.parent[k as usize];
            self.parent[k as usize] = root;
            k = next;
        }
        root
    }

    fn get(&self, c: u32, x: usize) -> u32 {
        self.rows[c as usize][x]
    }

    fn define(&mut self, c: u32, x: usize) {
        if self.live >= self.limit {
            self.overflow = true;
            return;
        }
        let n = self.rows.len() as u32;
        self.rows.push(vec![UNDEF; self.inv.len()]);
        self.parent.push(n);
        self.live += 1;
        self.rows[c as usize][x] = n;
        self.rows[n as usize][self.inv[x]] = c;
    }

    fn merge(&mut self, k: u32, l: u32, queue: &mut Vec<u32>) {
        let (a, b) = (self.rep(k), self.rep(l));
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            self.parent[hi as usize] = lo;
            self.live -= 1;
            queue.push(hi);
        }
    }

    fn coincidence(&mut self, a: u32, b: u32) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let g = queue[i];
            i += 1;
            for x in 0..self.inv.len() {
                let d = self.get(g, x);
                if d == UNDEF {
                    continue;
                }
                let xi = self.inv[x];
                self.rows[d as usize][xi] = UNDEF;
                let mu = self.rep(g);
                let nu = self.rep(d);
                if self.get(mu, x) != UNDEF {
                    let t = self.get(mu, x);
                    self.merge(nu, t, &mut queue);
                } else if self.get(nu, xi) != UNDEF {
                    let t = self.get(nu, xi);
                    self.merge(mu, t, &mut queue);
                } else {
                    self.rows[mu as usize][x] = nu;
                    self.rows[nu as usize][xi] = mu;
                }
            }
        }
    }

    fn scan_and_fill(&mut self, a: u32, w: &[usize]) {
        if w.is_empty() {
            return;
        }
        let mut f = a;
        let mut b = a;
        let mut i = 0usize;
        let mut j = w.len() as isize - 1;
        loop {
            while (i as isize) <= j && self.get(f, w[i]) != UNDEF {
                f = self.get(f, w[i]);
                i += 1;
            }
            if (i as isize) > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return;
            }
            while j >= i as isize && self.get(b, self.inv[w[j as usize]]) != UNDEF {
                b = self.get(b, self.inv[w[j as usize]]);
                j -= 1;
            }
            if j < i as isize {
                self.coincidence(f, b);
                return;
            } else if j == i as isize {
                self.rows[f as usize][w[i]] = b;
                self.rows[b as usize][self.inv[w[i]]] = f;
                return;
            }
            self.define(f, w[i]);
            if self.overflow {
                return;
            }
        }
    }
}

/// Index of the subgroup generated by `subgroup` words in the group with the
/// given relators; generators are columns 0..gens, `inv[x]` the inverse
/// column. Returns None when more than `limit` live cosets are needed.
pub fn enumerate(
    gens: usize,
    inv: &[usize],
    relators: &[Vec<usize>],
    subgroup: &[Vec<usize>],
    limit: usize,
) -> Option<usize> {
    let mut t = Table {
        rows: vec![vec![UNDEF; gens]],
        parent: vec![0],
        inv: inv.to_vec(),
        live: 1,
        limit,
        overflow: false,
    };
    for w in subgroup {
        t.scan_and_fill(0, w);
        if t.overflow {
            return None;
        }
    }
    let mut a = 0u32;
    while (a as usize) < t.rows.len() {
        for r in relators {
            if t.parent[a as usize] != a {
                break;
            }
            t.scan_and_fill(a, r);
            if t.overflow {
                return None;
            }
        }
        if t.parent[a as usize] == a {
            for x in 0..gens {
                if t.get(a, x) == UNDEF {
                    t.define(a, x);
                    if t.overflow {
                        return None;
                    }
                }
            }
        }
        a += 1;
    }
    Some(t.live)
}
