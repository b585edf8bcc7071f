//! Ideal triangulations of punctured surfaces, their exchange matrices, flips
//! as mutations, and a small catalog of mapping classes realized as loops.
//!
//! A triangle is a counter-clockwise triple of edge labels. Each triangle
//! `(a, b, c)` adds `+1` to `b_ab`, `b_bc`, `b_ca` (and `-1` to the transposed
//! entries), which turns the two-triangle torus into the Markov matrix.
//! Self-folded triangles are not supported.

use std::collections::HashSet;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{ser_path, ser_perm, TriangulationFile};
use crate::linalg::IntMatrix;
use crate::seed::{ExchangeMatrix, MutationLoop, MutationPath, Permutation};
use crate::stability::{detect_sign_stability, Budget, Region, Verdict};

/// Largest edge count accepted by the relabeling search.
pub const RELABEL_SEARCH_CAP: usize = 9;

#[derive(Clone, Debug)]
pub struct IdealTriangulation {
    genus: usize,
    punctures: usize,
    triangles: Vec<[usize; 3]>,
}

fn canonical(t: [usize; 3]) -> [usize; 3] {
    let rots = [t, [t[1], t[2], t[0]], [t[2], t[0], t[1]]];
    *rots.iter().min().expect("three rotations")
}

fn rotate_to(t: [usize; 3], k: usize) -> [usize; 3] {
    if t[0] == k {
        t
    } else if t[1] == k {
        [t[1], t[2], t[0]]
    } else {
        [t[2], t[0], t[1]]
    }
}

fn is_self_folded(t: &[usize; 3]) -> bool {
    t[0] == t[1] || t[1] == t[2] || t[0] == t[2]
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl PartialEq for IdealTriangulation {
    /// Same surface type and the same multiset of triangles up to rotation.
    fn eq(&self, other: &Self) -> bool {
        let key = |t: &IdealTriangulation| {
            let mut v: Vec<[usize; 3]> = t.triangles.iter().copied().map(canonical).collect();
            v.sort();
            v
        };
        self.genus == other.genus && self.punctures == other.punctures && key(self) == key(other)
    }
}

impl Eq for IdealTriangulation {}

impl IdealTriangulation {
    /// Validates a 0-based triangle list against the declared surface type.
    pub fn new(genus: usize, punctures: usize, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if punctures == 0 {
            return Err(Error::Triangulation("at least one puncture is required".into()));
        }
        let n = (6 * genus + 3 * punctures)
            .checked_sub(6)
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Triangulation(format!("no ideal triangulation for g = {genus}, h = {punctures}")))?;
        if 3 * triangles.len() != 2 * n {
            return Err(Error::Triangulation(format!(
                "{} triangles for {n} edges; expected {}",
                triangles.len(),
                2 * n / 3
            )));
        }
        let mut count = vec![0usize; n];
        for t in &triangles {
            if is_self_folded(t) {
                return Err(Error::Triangulation(format!(
                    "self-folded triangle {:?} is not supported",
                    t.map(|e| e + 1)
                )));
            }
            for &e in t {
                if e >= n {
                    return Err(Error::IndexOutOfRange { index: e, rank: n });
                }
                count[e] += 1;
            }
        }
        if let Some(e) = count.iter().position(|&c| c != 2) {
            return Err(Error::Triangulation(format!(
                "edge {} appears {} times; every edge bounds exactly two triangle sides",
                e + 1,
                count[e]
            )));
        }
        let tri = IdealTriangulation {
            genus,
            punctures,
            triangles,
        };
        let v = tri.vertex_count();
        if v != punctures {
            return Err(Error::Triangulation(format!(
                "gluing has {v} vertices but {punctures} punctures were declared"
            )));
        }
        Ok(tri)
    }

    pub fn from_file(f: &TriangulationFile) -> Result<Self> {
        let tris = f
            .triangles
            .iter()
            .map(|t| {
                let mut out = [0usize; 3];
                for (o, &e) in out.iter_mut().zip(t) {
                    if e == 0 {
                        return Err(Error::Triangulation("edge labels are 1-based".into()));
                    }
                    *o = e - 1;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        IdealTriangulation::new(f.genus, f.punctures, tris)
    }

    pub fn to_file(&self) -> TriangulationFile {
        TriangulationFile {
            genus: self.genus,
            punctures: self.punctures,
            triangles: self.triangles.iter().map(|t| t.map(|e| e + 1)).collect(),
        }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn punctures(&self) -> usize {
        self.punctures
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edge_count(&self) -> usize {
        self.triangles.len() * 3 / 2
    }

    /// Vertices of the glued surface. Side `i` of a triangle runs from corner
    /// `i` to corner `i + 1`; gluing reverses orientation.
    fn vertex_count(&self) -> usize {
        let f = self.triangles.len();
        let mut parent: Vec<usize> = (0..3 * f).collect();
        let mut slots: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.edge_count()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for (i, &e) in tri.iter().enumerate() {
                slots[e].push((t, i));
            }
        }
        for s in &slots {
            let (t, i) = s[0];
            let (u, j) = s[1];
            let pairs = [(3 * t + i, 3 * u + (j + 1) % 3), (3 * t + (i + 1) % 3, 3 * u + j)];
            for (a, b) in pairs {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
        (0..3 * f).map(|x| find(&mut parent, x)).collect::<HashSet<_>>().len()
    }

    /// Signed adjacency matrix.
    pub fn to_matrix(&self) -> ExchangeMatrix {
        let n = self.edge_count();
        let mut b = vec![vec![0i64; n]; n];
        for t in &self.triangles {
            for i in 0..3 {
                let (p, q) = (t[i], t[(i + 1) % 3]);
                b[p][q] += 1;
                b[q][p] -= 1;
            }
        }
        let rows: Vec<Vec<BigInt>> = b
            .into_iter()
            .map(|r| r.into_iter().map(BigInt::from).collect())
            .collect();
        ExchangeMatrix::new(IntMatrix::from_rows(rows).expect("square")).expect("skew by construction")
    }

    /// Replaces edge `k` by the other diagonal of its quadrilateral.
    pub fn flip(&self, k: usize) -> Result<Self> {
        let n = self.edge_count();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, rank: n });
        }
        let holders: Vec<usize> = (0..self.triangles.len())
            .filter(|&t| self.triangles[t].contains(&k))
            .collect();
        let [t1, t2] = holders[..] else {
            return Err(Error::Unflippable(k + 1, "edge lies in a self-folded triangle".into()));
        };
        let [_, a, b] = rotate_to(self.triangles[t1], k);
        let [_, c, d] = rotate_to(self.triangles[t2], k);
        let new1 = [k, b, c];
        let new2 = [k, d, a];
        if is_self_folded(&new1) || is_self_folded(&new2) {
            return Err(Error::Unflippable(
                k + 1,
                "flip would create a self-folded triangle".into(),
            ));
        }
        let mut triangles = self.triangles.clone();
        triangles[t1] = new1;
        triangles[t2] = new2;
        Ok(IdealTriangulation {
            genus: self.genus,
            punctures: self.punctures,
            triangles,
        })
    }

    /// Flips along a path of edges.
    pub fn flip_path(&self, path: &MutationPath) -> Result<Self> {
        path.steps().iter().try_fold(self.clone(), |t, &k| t.flip(k))
    }

    /// Renames edge `e` to `σ(e)`; the matrix becomes `σ.B`.
    pub fn relabeled(&self, sigma: &Permutation) -> Result<Self> {
        if sigma.len() != self.edge_count() {
            return Err(Error::RankMismatch {
                left: self.edge_count(),
                right: sigma.len(),
            });
        }
        Ok(IdealTriangulation {
            genus: self.genus,
            punctures: self.punctures,
            triangles: self.triangles.iter().map(|t| t.map(|e| sigma.apply(e))).collect(),
        })
    }
}

/// All `σ` with `self.relabeled(σ) == end`, in lexicographic order.
pub fn closing_relabelings(start: &IdealTriangulation, end: &IdealTriangulation) -> Result<Vec<Permutation>> {
    let n = start.edge_count();
    if n > RELABEL_SEARCH_CAP {
        return Err(Error::SearchCapExceeded {
            rank: n,
            cap: RELABEL_SEARCH_CAP,
        });
    }
    let b = start.to_matrix();
    let b_end = end.to_matrix();
    let mut out = Vec::new();
    let mut images = vec![usize::MAX; n];
    let mut used = vec![false; n];
    relabel_dfs(0, &b, &b_end, &mut images, &mut used, &mut |img| {
        let sigma = Permutation::new(img.to_vec()).expect("bijection");
        if start.relabeled(&sigma).is_ok_and(|t| t == *end) {
            out.push(sigma);
        }
    });
    Ok(out)
}

// σ.B = B_end means b_end[σ(i)][σ(j)] = b[i][j]
fn relabel_dfs(
    i: usize,
    b: &ExchangeMatrix,
    b_end: &ExchangeMatrix,
    images: &mut [usize],
    used: &mut [bool],
    emit: &mut dyn FnMut(&[usize]),
) {
    let n = images.len();
    if i == n {
        emit(images);
        return;
    }
    for c in 0..n {
        if used[c] {
            continue;
        }
        let ok = (0..=i).all(|j| {
            let cj = if j == i { c } else { images[j] };
            b.entry(i, j) == b_end.entry(c, cj) && b.entry(j, i) == b_end.entry(cj, c)
        });
        if !ok {
            continue;
        }
        images[i] = c;
        used[c] = true;
        relabel_dfs(i + 1, b, b_end, images, used, emit);
        used[c] = false;
        images[i] = usize::MAX;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceMappingClassSpec {
    pub name: String,
    pub description: String,
    #[serde(serialize_with = "ser_path")]
    pub flip_word: MutationPath,
    #[serde(serialize_with = "ser_perm")]
    pub relabel: Permutation,
    pub expected_stretch: Option<String>,
    pub expected_lambda: Option<f64>,
}

impl SurfaceMappingClassSpec {
    /// The mutation loop on the triangulation's seed.
    pub fn to_loop(&self, t: &IdealTriangulation) -> Result<MutationLoop> {
        MutationLoop::new(t.to_matrix(), self.flip_word.clone(), self.relabel.clone())
    }
}

/// Two triangles on edges 1, 2, 3 with the same cyclic order.
pub fn torus_triangulation() -> IdealTriangulation {
    IdealTriangulation::new(1, 1, vec![[0, 1, 2], [0, 1, 2]]).expect("valid torus")
}

/// Boundary of a tetrahedron with its four vertices as punctures.
pub fn sphere4_triangulation() -> IdealTriangulation {
    IdealTriangulation::new(0, 4, vec![[3, 5, 4], [2, 5, 1], [0, 4, 2], [1, 3, 0]]).expect("valid sphere")
}

pub const GOLDEN_SQUARE: f64 = 2.618_033_988_749_895;

struct CatalogEntry {
    name: &'static str,
    surface: fn() -> IdealTriangulation,
    description: &'static str,
    word: &'static [usize],
    relabel: &'static [usize],
    expected_stretch: Option<(&'static str, f64)>,
}

// Flip words and relabelings (0-based) frozen from `search_flip_loops`.
const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "torus-LR",
        surface: torus_triangulation,
        description: "pseudo-Anosov class acting on homology by [[2,1],[1,1]]",
        word: &[0, 1],
        relabel: &[2, 0, 1],
        expected_stretch: Some(("(3+sqrt(5))/2", GOLDEN_SQUARE)),
    },
    CatalogEntry {
        name: "torus-L",
        surface: torus_triangulation,
        description: "single Dehn twist, parabolic control",
        word: &[0],
        relabel: &[1, 0, 2],
        expected_stretch: None,
    },
    CatalogEntry {
        name: "sphere4-twist",
        surface: sphere4_triangulation,
        description: "twist about a curve enclosing two punctures, pure and parabolic control",
        word: &[0, 5, 0, 5],
        relabel: &[0, 1, 2, 3, 4, 5],
        expected_stretch: None,
    },
    CatalogEntry {
        name: "sphere4-LR",
        surface: sphere4_triangulation,
        description: "pseudo-Anosov class descending from the torus class [[2,1],[1,1]]",
        word: &[0, 5, 1, 4],
        relabel: &[2, 0, 1, 4, 5, 3],
        expected_stretch: Some(("(3+sqrt(5))/2", GOLDEN_SQUARE)),
    },
];

pub fn catalog_names() -> Vec<&'static str> {
    CATALOG.iter().map(|c| c.name).collect()
}

/// Looks up a named mapping class and its starting triangulation.
pub fn builtin_mapping_class(name: &str) -> Result<(IdealTriangulation, SurfaceMappingClassSpec)> {
    let c = CATALOG
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownMappingClass(name.to_string()))?;
    let spec = SurfaceMappingClassSpec {
        name: c.name.to_string(),
        description: c.description.to_string(),
        flip_word: MutationPath::new(c.word.to_vec()),
        relabel: Permutation::new(c.relabel.to_vec())?,
        expected_stretch: c.expected_stretch.map(|(s, _)| s.to_string()),
        expected_lambda: c.expected_stretch.map(|(_, l)| l),
    };
    Ok(((c.surface)(), spec))
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchHit {
    #[serde(serialize_with = "ser_path")]
    pub word: MutationPath,
    #[serde(serialize_with = "ser_perm")]
    pub relabel: Permutation,
    pub verdict: Verdict,
    pub lambda: Option<f64>,
    pub char_poly: Option<Vec<String>>,
}

/// Enumerates flip words of length `1..=max_len` (no immediate repeats) that
/// return the triangulation to a relabeled copy of itself, with every closing
/// relabeling, and runs sign-stability detection on `C⁺` for each loop.
pub fn search_flip_loops(t: &IdealTriangulation, max_len: usize, budget: Budget) -> Result<Vec<SearchHit>> {
    let n = t.edge_count();
    let b = t.to_matrix();
    let mut hits = Vec::new();
    let mut frontier: Vec<(Vec<usize>, IdealTriangulation)> = vec![(Vec::new(), t.clone())];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (word, tri) in &frontier {
            for k in 0..n {
                if word.last() == Some(&k) {
                    continue;
                }
                let Ok(flipped) = tri.flip(k) else {
                    continue;
                };
                let mut w = word.clone();
                w.push(k);
                for sigma in closing_relabelings(t, &flipped)? {
                    let lp = MutationLoop::new(b.clone(), MutationPath::new(w.clone()), sigma.clone())?;
                    let r = detect_sign_stability(&lp, Region::ConePlus, budget)?;
                    hits.push(SearchHit {
                        word: MutationPath::new(w.clone()),
                        relabel: sigma,
                        verdict: r.verdict,
                        lambda: r.lambda,
                        char_poly: r.spectrum_e.map(|s| s.char_poly),
                    });
                }
                next.push((w, flipped));
            }
        }
        frontier = next;
    }
    Ok(hits)
}
