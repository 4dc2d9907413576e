use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{NodeId, Snapshot, TemporalGraph};
use crate::error::{Result, TmpError};

/// Column names of an edge-list CSV file. The weight column is optional:
/// when it is absent from the header every record has weight 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EdgeListSchema {
    pub time: String,
    pub source: String,
    pub target: String,
    pub weight: Option<String>,
}

impl Default for EdgeListSchema {
    fn default() -> Self {
        EdgeListSchema {
            time: "time".into(),
            source: "source".into(),
            target: "target".into(),
            weight: Some("weight".into()),
        }
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| TmpError::validation(format!("missing column {name:?} in header")))
}

/// Reads a UTF-8 CSV edge list into a temporal graph.
///
/// A header row is required and lines starting with `#` are skipped. Distinct
/// raw times are re-indexed to `1..=T` in increasing order; repeated
/// `(t, u, v)` records have their weights summed. Reported line numbers are
/// physical lines of the input.
pub fn parse_temporal_edge_list<R: Read>(source: R, schema: &EdgeListSchema) -> Result<TemporalGraph> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = match reader.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => h.clone(),
        Ok(_) => return Err(TmpError::validation("empty input")),
        Err(e) => return Err(csv_error(e)),
    };
    let time_col = column(&headers, &schema.time)?;
    let src_col = column(&headers, &schema.source)?;
    let dst_col = column(&headers, &schema.target)?;
    let weight_col = schema
        .weight
        .as_deref()
        .and_then(|w| headers.iter().position(|h| h.trim() == w));
    let arity = headers.len();

    // raw time -> (u, v) -> weight; keyed by bit pattern of the normalized float
    let mut by_time: BTreeMap<OrderedTime, Vec<(NodeId, NodeId, f64)>> = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(e)),
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != arity {
            return Err(TmpError::Ingest {
                line,
                message: format!("expected {arity} fields, found {}", record.len()),
            });
        }
        let raw_time: f64 = record[time_col].parse().map_err(|_| TmpError::Ingest {
            line,
            message: format!("non-numeric time {:?}", &record[time_col]),
        })?;
        if !raw_time.is_finite() {
            return Err(TmpError::Ingest {
                line,
                message: format!("non-finite time {:?}", &record[time_col]),
            });
        }
        let weight = match weight_col.map(|c| &record[c]) {
            None | Some("") => 1.0,
            Some(text) => text.parse::<f64>().map_err(|_| TmpError::Ingest {
                line,
                message: format!("non-numeric weight {text:?}"),
            })?,
        };
        if !weight.is_finite() || weight <= 0.0 {
            return Err(TmpError::Validation(format!(
                "line {line}: weight must be positive, found {weight}"
            )));
        }
        let (u, v) = (&record[src_col], &record[dst_col]);
        if u.is_empty() || v.is_empty() {
            return Err(TmpError::Ingest {
                line,
                message: "empty node label".into(),
            });
        }
        if u == v {
            return Err(TmpError::Validation(format!("line {line}: self-loop on node {u:?}")));
        }
        by_time
            .entry(OrderedTime(raw_time))
            .or_default()
            .push((NodeId::from(u), NodeId::from(v), weight));
    }

    if by_time.is_empty() {
        return Err(TmpError::validation("empty input"));
    }
    let snapshots = by_time
        .into_values()
        .enumerate()
        .map(|(i, edges)| Snapshot::from_edges(i + 1, [], edges))
        .collect::<Result<Vec<_>>>()?;
    TemporalGraph::new(snapshots)
}

/// Writes the graph as `time,source,target,weight` with dense times `1..=T`.
///
/// Isolated nodes are not representable in an edge list and are dropped.
pub fn write_temporal_edge_list<W: Write>(tg: &TemporalGraph, sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["time", "source", "target", "weight"]).map_err(csv_error)?;
    for snap in tg.snapshots() {
        let t = snap.timestamp().to_string();
        for (e, w) in snap.edges() {
            let (a, b) = e.endpoints();
            writer
                .write_record([t.as_str(), a.as_str(), b.as_str(), w.to_string().as_str()])
                .map_err(csv_error)?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> TmpError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => TmpError::Io(io),
        other => TmpError::Ingest {
            line,
            message: format!("{other:?}"),
        },
    }
}

#[derive(Debug, Clone, Copy)]
struct OrderedTime(f64);

impl PartialEq for OrderedTime {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0).is_eq()
    }
}
impl Eq for OrderedTime {}
impl PartialOrd for OrderedTime {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrderedTime {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // -0.0 and 0.0 are the same instant
        (self.0 + 0.0).total_cmp(&(other.0 + 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<TemporalGraph> {
        parse_temporal_edge_list(text.as_bytes(), &EdgeListSchema::default())
    }

    #[test]
    fn aggregates_duplicates_and_reindexes_time() {
        let tg = parse("time,source,target,weight\n10,a,b,2.0\n10,a,b,3.0\n20,b,c,1.0\n").unwrap();
        assert_eq!(tg.len(), 2);
        assert_eq!(tg.at(1).weight(&"a".into(), &"b".into()), 5.0);
        assert_eq!(tg.at(1).edge_count(), 1);
        assert_eq!(tg.at(2).weight(&"b".into(), &"c".into()), 1.0);
        assert_eq!(tg.at(2).edge_count(), 1);
    }

    #[test]
    fn reversed_duplicate_is_same_edge() {
        let tg = parse("time,source,target,weight\n1,a,b,2\n1,b,a,3\n").unwrap();
        assert_eq!(tg.at(1).weight(&"a".into(), &"b".into()), 5.0);
    }

    #[test]
    fn weight_column_is_optional() {
        let tg = parse("time,source,target\n1,a,b\n").unwrap();
        assert_eq!(tg.len(), 1);
        assert_eq!(tg.at(1).weight(&"a".into(), &"b".into()), 1.0);
    }

    #[test]
    fn arity_error_carries_line() {
        match parse("time,source,target\n1,a\n") {
            Err(TmpError::Ingest { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse("# leading comment\ntime,source,target,weight\n1,a,b,1\nx,a,b,1\n") {
            Err(TmpError::Ingest { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(parse(""), Err(TmpError::Validation(_))));
        assert!(matches!(parse("time,source,target\n"), Err(TmpError::Validation(_))));
        assert!(matches!(
            parse("time,source,target,weight\n1,a,b,-2\n"),
            Err(TmpError::Validation(_))
        ));
        assert!(matches!(
            parse("time,source,target,weight\n1,a,b,abc\n"),
            Err(TmpError::Ingest { line: 2, .. })
        ));
        assert!(matches!(parse("t,source,target\n1,a,b\n"), Err(TmpError::Validation(_))));
    }

    #[test]
    fn custom_columns_and_comments() {
        let schema = EdgeListSchema {
            time: "day".into(),
            source: "from".into(),
            target: "to".into(),
            weight: Some("value".into()),
        };
        let text = "from,to,value,day\n# skipped\nx,y,0.5,3\n";
        let tg = parse_temporal_edge_list(text.as_bytes(), &schema).unwrap();
        assert_eq!(tg.at(1).weight(&"x".into(), &"y".into()), 0.5);
    }
}
