//! JSON forms of graphs, products and labellings, and a DIMACS edge-format
//! reader.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, ProductGraph};
use crate::labelling::{LabelMode, Labelling};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub name: String,
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        GraphJson {
            name: g.name().to_string(),
            n: g.order(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
        }
    }
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Graph> {
        let edges: Vec<(usize, usize)> = j.edges.iter().map(|e| (e[0], e[1])).collect();
        Ok(Graph::from_edges(j.n, &edges)?.named(j.name))
    }
}

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Graph::try_from(GraphJson::deserialize(d)?).map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductGraphJson {
    pub name: String,
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub factors: Vec<GraphJson>,
}

impl From<&ProductGraph> for ProductGraphJson {
    fn from(pg: &ProductGraph) -> Self {
        let GraphJson { name, n, edges } = GraphJson::from(pg.graph());
        ProductGraphJson { name, n, edges, factors: pg.factors().iter().map(GraphJson::from).collect() }
    }
}

impl TryFrom<ProductGraphJson> for ProductGraph {
    type Error = Error;

    /// Rebuilds the product from its factors; the stored vertex count and
    /// edge list must agree with the rebuilt graph.
    fn try_from(j: ProductGraphJson) -> Result<ProductGraph> {
        let factors = j.factors.into_iter().map(Graph::try_from).collect::<Result<Vec<_>>>()?;
        let pg = ProductGraph::cartesian(factors)?.named(j.name);
        let mut edges: Vec<(usize, usize)> =
            j.edges.iter().map(|e| (e[0].min(e[1]), e[0].max(e[1]))).collect();
        edges.sort_unstable();
        edges.dedup();
        if j.n != pg.order() || !edges.iter().copied().eq(pg.graph().edges()) {
            return Err(Error::Parse("product edge list does not match its factors".into()));
        }
        Ok(pg)
    }
}

impl Serialize for ProductGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProductGraphJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProductGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ProductGraph::try_from(ProductGraphJson::deserialize(d)?).map_err(de::Error::custom)
    }
}

/// A graph file, with its factors when it was written as a product.
#[derive(Debug, Clone)]
pub enum GraphFile {
    Plain(Graph),
    Product(ProductGraph),
}

impl GraphFile {
    pub fn graph(&self) -> &Graph {
        match self {
            GraphFile::Plain(g) => g,
            GraphFile::Product(pg) => pg.graph(),
        }
    }

    pub fn product(&self) -> Option<&ProductGraph> {
        match self {
            GraphFile::Product(pg) => Some(pg),
            GraphFile::Plain(_) => None,
        }
    }

    pub fn from_json(text: &str) -> Result<GraphFile> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("factors").is_some() {
            Ok(GraphFile::Product(serde_json::from_value(value)?))
        } else {
            Ok(GraphFile::Plain(serde_json::from_value(value)?))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeJson {
    Linear,
    Cyclic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabellingJson {
    pub mode: ModeJson,
    pub k: Option<u64>,
    pub labels: Vec<u64>,
}

impl From<&Labelling> for LabellingJson {
    fn from(l: &Labelling) -> Self {
        let (mode, k) = match l.mode() {
            LabelMode::Linear => (ModeJson::Linear, None),
            LabelMode::Cyclic { k } => (ModeJson::Cyclic, Some(k)),
        };
        LabellingJson { mode, k, labels: l.labels().to_vec() }
    }
}

impl TryFrom<LabellingJson> for Labelling {
    type Error = Error;

    fn try_from(j: LabellingJson) -> Result<Labelling> {
        match (j.mode, j.k) {
            (ModeJson::Linear, None) => Ok(Labelling::linear(j.labels)),
            (ModeJson::Linear, Some(_)) => Err(Error::Parse("linear labelling must have k = null".into())),
            (ModeJson::Cyclic, Some(k)) => Labelling::cyclic(j.labels, k),
            (ModeJson::Cyclic, None) => Err(Error::Parse("cyclic labelling needs k".into())),
        }
    }
}

impl Serialize for Labelling {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LabellingJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Labelling {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Labelling::try_from(LabellingJson::deserialize(d)?).map_err(de::Error::custom)
    }
}

/// Reads the DIMACS edge format: `c` comment lines, one `p edge n m`
/// line, then `e u v` lines with 1-based endpoints.
pub fn parse_dimacs(text: &str) -> Result<Graph> {
    let mut n = None;
    let mut declared = 0usize;
    let mut edges = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        let bad = |what: &str| Error::Parse(format!("line {}: {what}", no + 1));
        match parts.next() {
            None | Some("c") => continue,
            Some("p") => {
                if n.is_some() {
                    return Err(bad("second problem line"));
                }
                if parts.next() != Some("edge") {
                    return Err(bad("expected `p edge n m`"));
                }
                let mut num = || parts.next().and_then(|x| x.parse::<usize>().ok()).ok_or_else(|| bad("expected `p edge n m`"));
                n = Some(num()?);
                declared = num()?;
            }
            Some("e") => {
                let n = n.ok_or_else(|| bad("edge before the problem line"))?;
                let mut end = || {
                    parts
                        .next()
                        .and_then(|x| x.parse::<usize>().ok())
                        .filter(|&x| (1..=n).contains(&x))
                        .ok_or_else(|| bad("endpoint must be an integer in 1..=n"))
                };
                let (u, v) = (end()?, end()?);
                edges.push((u - 1, v - 1));
            }
            Some(other) => return Err(bad(&format!("unknown line type `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::Parse("missing problem line".into()))?;
    if edges.len() != declared {
        return Err(Error::Parse(format!("declared {declared} edges, found {}", edges.len())));
    }
    Graph::from_edges(n, &edges)
}

pub fn to_dimacs(g: &Graph) -> String {
    let mut out = String::new();
    if !g.name().is_empty() {
        out.push_str(&format!("c {}\n", g.name()));
    }
    out.push_str(&format!("p edge {} {}\n", g.order(), g.edge_count()));
    for (u, v) in g.edges() {
        out.push_str(&format!("e {} {}\n", u + 1, v + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_json_round_trip() {
        let g = Graph::cycle(4).unwrap().named("C4");
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"name":"C4","n":4,"edges":[[0,1],[0,3],[1,2],[2,3]]}"#);
        assert_eq!(serde_json::from_str::<Graph>(&s).unwrap(), g);
    }

    #[test]
    fn product_json_round_trip() {
        let pg = ProductGraph::hamming(&[3, 2]).unwrap();
        let s = serde_json::to_string(&pg).unwrap();
        let back = GraphFile::from_json(&s).unwrap();
        let back = back.product().unwrap();
        assert_eq!(back.graph(), pg.graph());
        assert_eq!(back.orders(), vec![3, 2]);

        let mut j = ProductGraphJson::from(&pg);
        j.edges.pop();
        assert!(ProductGraph::try_from(j).is_err());
    }

    #[test]
    fn labelling_json() {
        let l = Labelling::cyclic(vec![0, 2, 4], 6).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, r#"{"mode":"cyclic","k":6,"labels":[0,2,4]}"#);
        assert_eq!(serde_json::from_str::<Labelling>(&s).unwrap(), l);
        let lin = Labelling::linear(vec![1, 0]);
        assert_eq!(serde_json::to_string(&lin).unwrap(), r#"{"mode":"linear","k":null,"labels":[1,0]}"#);
        assert!(serde_json::from_str::<Labelling>(r#"{"mode":"cyclic","k":2,"labels":[3]}"#).is_err());
        assert!(serde_json::from_str::<Labelling>(r#"{"mode":"cyclic","k":null,"labels":[0]}"#).is_err());
    }

    #[test]
    fn dimacs() {
        let text = "c square\np edge 4 4\ne 1 2\ne 2 3\ne 3 4\ne 4 1\n";
        let g = parse_dimacs(text).unwrap();
        assert_eq!(g, Graph::cycle(4).unwrap().named(""));
        assert_eq!(parse_dimacs(&to_dimacs(&g)).unwrap(), g);
        assert!(parse_dimacs("p edge 2 1\ne 1 3\n").is_err());
        assert!(parse_dimacs("e 1 2\n").is_err());
        assert!(parse_dimacs("p edge 2 2\ne 1 2\n").is_err());
    }
}
