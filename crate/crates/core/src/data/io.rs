use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::data::record::{Attribute, AttributeSet, Dataset, Label, PoiRecord, Provenance};
use crate::error::{Error, Result};

pub const LABEL_COLUMN: &str = "LABEL";

/// Which columns a CSV must carry.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    /// Attributes whose columns must be present in the header. Absent
    /// optional columns load as empty values.
    pub required: Vec<Attribute>,
    /// Label for files without a `LABEL` column. `None` makes the column
    /// mandatory.
    pub default_label: Option<Label>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema { required: Attribute::ALL.to_vec(), default_label: None }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    read_csv(File::open(path)?, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| malformed(&e, 1))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));

    for a in &schema.required {
        if find(a.column()).is_none() {
            return Err(Error::MissingColumn(a.column().to_string()));
        }
    }
    let columns: Vec<Option<usize>> = Attribute::ALL.iter().map(|a| find(a.column())).collect();
    let label_col = find(LABEL_COLUMN);
    if label_col.is_none() && schema.default_label.is_none() {
        return Err(Error::MissingColumn(LABEL_COLUMN.to_string()));
    }

    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        // header is line 1
        let line = i as u64 + 2;
        let row = row.map_err(|e| malformed(&e, line))?;
        let cell = |a: Attribute| -> String {
            columns[a as usize].and_then(|c| row.get(c)).unwrap_or("").trim().to_string()
        };
        let label = match label_col {
            Some(c) => {
                let raw = row.get(c).unwrap_or("").trim();
                raw.parse::<u8>().ok().and_then(Label::from_u8).ok_or_else(|| Error::MalformedRow {
                    row: line,
                    detail: format!("LABEL must be 0 or 1, got {raw:?}"),
                })?
            }
            None => schema.default_label.expect("checked above"),
        };
        records.push(PoiRecord {
            lm_id: cell(Attribute::LmId),
            x: parse_coord(&cell(Attribute::X)),
            y: parse_coord(&cell(Attribute::Y)),
            lm_name: cell(Attribute::LmName),
            cate: cell(Attribute::Cate),
            str_add: cell(Attribute::StrAdd),
            unit: cell(Attribute::Unit),
            mun: cell(Attribute::Mun),
            pr: cell(Attribute::Pr),
            pc: cell(Attribute::Pc),
            phone: cell(Attribute::Phone),
            website: cell(Attribute::Website),
            label,
            missing: AttributeSet::empty(),
        });
    }
    Ok(Dataset::new(records, Provenance::Loaded))
}

fn parse_coord(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn malformed(e: &csv::Error, fallback_line: u64) -> Error {
    let row = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    Error::MalformedRow { row, detail: e.to_string() }
}

/// Writes the full column set plus `LABEL`.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = Attribute::ALL.iter().map(|a| a.column()).collect();
    header.push(LABEL_COLUMN);
    w.write_record(&header)?;
    for r in &ds.records {
        let coord = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let label = r.label.as_u8().to_string();
        w.write_record([
            r.lm_id.as_str(),
            &coord(r.x),
            &coord(r.y),
            &r.lm_name,
            &r.cate,
            &r.str_add,
            &r.unit,
            &r.mun,
            &r.pr,
            &r.pc,
            &r.phone,
            &r.website,
            &label,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_csv(ds, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "LM_ID,X,Y,LM_NAME,CATE,STR_ADD,U,MUN,PR,PC,PHONE,WEBSITE,LABEL";

    #[test]
    fn three_rows_load() {
        let csv = format!(
            "{HEADER}\n\
             1,43.6,-79.7,Library,Institutional,1 Main St,,Brampton,ON,L6P 1A1,905-555-0101,https://www.brampton.ca,1\n\
             2,43.7,-79.6,Arena,Recreation,2 Main St,,Brampton,ON,L6P 1A2,905-555-0102,https://www.brampton.ca,1\n\
             3,43.8,-79.5,Clinic,Medical,3 Main St,4,Caledon,ON,L7C 1A3,905-555-0103,,1\n"
        );
        let ds = read_csv(csv.as_bytes(), &CsvSchema::default()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.records[2].unit, "4");
        assert_eq!(ds.records[0].x, Some(43.6));
    }

    #[test]
    fn missing_column_is_named() {
        let csv = "LM_ID,X,Y,LM_NAME,CATE,STR_ADD,U,MUN,PR,PHONE,WEBSITE,LABEL\n";
        let err = read_csv(csv.as_bytes(), &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "PC"), "{err}");
    }

    #[test]
    fn unparseable_coordinate_is_missing_not_dropped() {
        let csv = format!("{HEADER}\n1,abc,-79.7,n,c,s,,m,ON,L6P 1A1,p,w,0\n");
        let ds = read_csv(csv.as_bytes(), &CsvSchema::default()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.records[0].x, None);
        assert_eq!(ds.records[0].label, Label::Fake);
    }

    #[test]
    fn ragged_row_reports_line() {
        let csv = format!("{HEADER}\n1,1,1,n,c,s,,m,ON,pc,p,w,1\n2,1,1,n\n");
        match read_csv(csv.as_bytes(), &CsvSchema::default()).unwrap_err() {
            Error::MalformedRow { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_label_reports_line() {
        let csv = format!("{HEADER}\n1,1,1,n,c,s,,m,ON,pc,p,w,7\n");
        assert!(matches!(
            read_csv(csv.as_bytes(), &CsvSchema::default()),
            Err(Error::MalformedRow { row: 2, .. })
        ));
    }

    #[test]
    fn default_label_when_column_absent() {
        let csv = "LM_ID,X,Y,LM_NAME,CATE,STR_ADD,U,MUN,PR,PC,PHONE,WEBSITE\n1,1,1,n,c,s,,m,ON,pc,p,w\n";
        let schema = CsvSchema { default_label: Some(Label::Real), ..CsvSchema::default() };
        let ds = read_csv(csv.as_bytes(), &schema).unwrap();
        assert_eq!(ds.records[0].label, Label::Real);
        assert!(matches!(read_csv(csv.as_bytes(), &CsvSchema::default()), Err(Error::MissingColumn(_))));
    }

    #[test]
    fn missing_file() {
        let err = load_csv("/definitely/not/here.csv", &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }

    #[test]
    fn write_then_read_preserves_records() {
        let csv = format!("{HEADER}\n7,43.61,-79.72,\"Hall, Main\",c,s,,m,ON,L6P 1A1,p,w,1\n8,,-79.7,n,c,s,2,m,ON,pc,p,w,0\n");
        let ds = read_csv(csv.as_bytes(), &CsvSchema::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), &CsvSchema::default()).unwrap();
        assert_eq!(back.records, ds.records);
    }
}
