/// Uniform-bucket nearest-neighbour index over 2-D points carrying a value.
#[derive(Debug, Clone)]
pub(crate) struct NearestIndex {
    points: Vec<[f64; 3]>,
    origin: [f64; 2],
    cell: f64,
    dims: [usize; 2],
    /// `starts[b]..starts[b + 1]` indexes `order` for bucket `b`.
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl NearestIndex {
    /// Panics on an empty point set.
    pub(crate) fn new(points: Vec<[f64; 3]>) -> Self {
        assert!(!points.is_empty(), "nearest-neighbour index needs points");
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = [(hi[0] - lo[0]).max(1e-12), (hi[1] - lo[1]).max(1e-12)];
        // about two points per bucket
        let cell = (span[0] * span[1] / (points.len() as f64 / 2.0)).sqrt().max(1e-9);
        let dims = [
            ((span[0] / cell).floor() as usize + 1).min(4096),
            ((span[1] / cell).floor() as usize + 1).min(4096),
        ];
        let cell = cell.max(span[0] / dims[0] as f64).max(span[1] / dims[1] as f64);
        let mut idx = Self {
            points,
            origin: lo,
            cell,
            dims,
            starts: Vec::new(),
            order: Vec::new(),
        };
        let buckets: Vec<usize> = idx.points.iter().map(|p| idx.bucket_of(p[0], p[1])).collect();
        let mut counts = vec![0usize; dims[0] * dims[1] + 1];
        for &b in &buckets {
            counts[b + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut order = vec![0; buckets.len()];
        for (i, &b) in buckets.iter().enumerate() {
            order[fill[b]] = i;
            fill[b] += 1;
        }
        idx.starts = counts;
        idx.order = order;
        idx
    }

    fn coord(&self, v: f64, k: usize) -> isize {
        ((v - self.origin[k]) / self.cell).floor() as isize
    }

    fn bucket_of(&self, u: f64, v: f64) -> usize {
        let i = self.coord(u, 0).clamp(0, self.dims[0] as isize - 1) as usize;
        let j = self.coord(v, 1).clamp(0, self.dims[1] as isize - 1) as usize;
        i * self.dims[1] + j
    }

    pub(crate) fn len(&self) -> usize {
        self.points.len()
    }

    /// Value and squared distance of the closest point.
    pub(crate) fn nearest(&self, u: f64, v: f64) -> (f64, f64) {
        let ci = self.coord(u, 0);
        let cj = self.coord(v, 1);
        let (ni, nj) = (self.dims[0] as isize, self.dims[1] as isize);
        let ci = ci.clamp(0, ni - 1);
        let cj = cj.clamp(0, nj - 1);
        let mut best = (f64::NAN, f64::INFINITY);
        let max_ring = ni.max(nj);
        for ring in 0..=max_ring {
            if best.1.is_finite() {
                let reach = (ring - 1).max(0) as f64 * self.cell;
                if reach * reach > best.1 {
                    break;
                }
            }
            for i in (ci - ring).max(0)..=(ci + ring).min(ni - 1) {
                let edge_i = i == ci - ring || i == ci + ring;
                let mut j = (cj - ring).max(0);
                while j <= (cj + ring).min(nj - 1) {
                    let b = (i * nj + j) as usize;
                    for &k in &self.order[self.starts[b]..self.starts[b + 1]] {
                        let p = &self.points[k];
                        let d = (p[0] - u).powi(2) + (p[1] - v).powi(2);
                        if d < best.1 {
                            best = (p[2], d);
                        }
                    }
                    // interior rows only need the two ring columns
                    if edge_i || j == cj + ring || ring == 0 {
                        j += 1;
                    } else {
                        j = cj + ring;
                    }
                }
            }
        }
        best
    }
}
