//! CSV ingestion (`id,text,labels,group`) and plain word lists.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::RawDocument;
use crate::error::{Error, Result};

const LABEL_SEPARATOR: char = ';';

/// Reads documents from CSV with an `id,text[,labels][,group]` header.
///
/// Row numbers in errors are 1-based file lines (the header is line 1).
pub fn read_documents<R: Read>(reader: R) -> Result<Vec<RawDocument>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Csv {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (id_col, text_col) = match (col("id"), col("text")) {
        (Some(i), Some(t)) => (i, t),
        _ => {
            return Err(Error::Csv {
                row: 1,
                message: "header must contain `id` and `text` columns".into(),
            })
        }
    };
    let labels_col = col("labels");
    let group_col = col("group");

    let mut docs = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Csv {
            row: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let id = field(id_col).trim();
        if id.is_empty() {
            return Err(Error::Csv {
                row,
                message: "empty document id".into(),
            });
        }
        let labels: BTreeSet<String> = labels_col
            .map(|c| {
                field(c)
                    .split(LABEL_SEPARATOR)
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_owned)
                    .collect()
            })
            .unwrap_or_default();
        let group = group_col
            .map(|c| field(c).trim())
            .filter(|g| !g.is_empty())
            .map(str::to_owned);
        docs.push(RawDocument {
            id: id.to_owned(),
            text: field(text_col).to_owned(),
            labels,
            group,
        });
    }
    Ok(docs)
}

pub fn read_documents_from_path(path: impl AsRef<Path>) -> Result<Vec<RawDocument>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_documents(BufReader::new(file))
}

/// Writes documents in the same schema [`read_documents`] accepts.
pub fn write_documents<W: Write>(writer: W, docs: &[RawDocument]) -> Result<()> {
    let to_err = |e: csv::Error| Error::Input(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "text", "labels", "group"])
        .map_err(to_err)?;
    for d in docs {
        let labels = d
            .labels
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            d.id.as_str(),
            d.text.as_str(),
            labels.as_str(),
            d.group.as_deref().unwrap_or(""),
        ])
        .map_err(to_err)?;
    }
    w.flush()
        .map_err(|e| Error::Input(format!("writing CSV: {e}")))?;
    Ok(())
}

/// One lowercase term per line; blank lines and `#` comments are skipped.
pub fn load_word_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut words = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let w = line.trim();
        if w.is_empty() || w.starts_with('#') {
            continue;
        }
        words.push(w.to_lowercase());
    }
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_quoted_rows_and_labels() {
        let data = "id,text,labels,group\n\
                    1,\"Parks closed, \"\"effective\"\" now\",closure;parks;closure,ontario\n\
                    2,plain text,,\n";
        let docs = read_documents(data.as_bytes()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].text, "Parks closed, \"effective\" now");
        assert_eq!(
            docs[0].labels.iter().collect::<Vec<_>>(),
            vec!["closure", "parks"]
        );
        assert_eq!(docs[0].group.as_deref(), Some("ontario"));
        assert!(docs[1].labels.is_empty());
        assert!(docs[1].group.is_none());
    }

    #[test]
    fn optional_columns() {
        let docs = read_documents("text,id\nhello,7\n".as_bytes()).unwrap();
        assert_eq!(docs[0].id, "7");
        assert_eq!(docs[0].text, "hello");
    }

    #[test]
    fn malformed_row_reports_line() {
        let data = "id,text,labels,group\n1,a,,\n2,b\n";
        match read_documents(data.as_bytes()) {
            Err(Error::Csv { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected CSV error, got {other:?}"),
        }
    }

    #[test]
    fn missing_header_column() {
        assert!(matches!(
            read_documents("id,body\n1,x\n".as_bytes()),
            Err(Error::Csv { row: 1, .. })
        ));
    }

    #[test]
    fn write_then_read() {
        let docs = vec![
            RawDocument::new("a", "x, \"y\"\nz")
                .with_labels(["l1", "l2"])
                .with_group("g"),
            RawDocument::new("b", ""),
        ];
        let mut buf = Vec::new();
        write_documents(&mut buf, &docs).unwrap();
        assert_eq!(read_documents(buf.as_slice()).unwrap(), docs);
    }
}
