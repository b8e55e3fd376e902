use crate::corpus::CorpusStats;
use crate::error::{Error, Result};
use crate::tag::PosTag;

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Tag distribution table: a `tag` column followed by one relative-frequency
/// column per named corpus, rows in tag-code order.
pub fn emit_tag_distribution(stats: &[(&str, &CorpusStats)]) -> Result<String> {
    if stats.is_empty() {
        return Err(Error::invalid("no corpora to tabulate"));
    }
    let mut out = String::from("tag");
    for (name, _) in stats {
        out.push(',');
        out.push_str(&csv_field(name));
    }
    out.push('\n');
    for tag in PosTag::ALL {
        out.push_str(tag.as_str());
        for (_, s) in stats {
            out.push(',');
            out.push_str(&s.frequency(tag).to_string());
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{corpus_stats, Corpus, DomainId, Sentence};

    fn stats(tags: &[PosTag]) -> CorpusStats {
        let d = DomainId::new("c", 0);
        let tagged: Vec<(String, PosTag)> = tags
            .iter()
            .enumerate()
            .map(|(i, &t)| (format!("w{i}"), t))
            .collect();
        corpus_stats(&Corpus::new(
            vec![Sentence::from_tagged("s", &tagged, d.clone()).unwrap()],
            d,
        ))
        .unwrap()
    }

    #[test]
    fn single_noun_corpus() {
        let s = stats(&[PosTag::Noun]);
        let csv = emit_tag_distribution(&[("gsch", &s)]).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "tag,gsch");
        assert_eq!(lines.len(), 18);
        assert!(lines.contains(&"NOUN,1"));
        assert!(lines.contains(&"DET,0"));
    }

    #[test]
    fn columns_sum_to_one() {
        let a = stats(&[PosTag::Noun, PosTag::Verb, PosTag::Det]);
        let b = stats(&[PosTag::Propn, PosTag::Propn]);
        let csv = emit_tag_distribution(&[("ewt", &a), ("gsch", &b)]).unwrap();
        let mut sums = [0.0; 2];
        for line in csv.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 3);
            sums[0] += cols[1].parse::<f64>().unwrap();
            sums[1] += cols[2].parse::<f64>().unwrap();
        }
        assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-9));
    }

    #[test]
    fn empty_list_is_error() {
        assert!(emit_tag_distribution(&[]).is_err());
    }
}
