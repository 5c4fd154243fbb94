//! Token sequence corpora (walks or record token bags) and the walk file format.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered token sequences over an interned vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SequenceCorpus {
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    sequences: Vec<Vec<u32>>,
}

impl SequenceCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Corpus whose ids are fixed up front, e.g. the node table of a graph.
    pub fn with_vocab(vocab: Vec<String>) -> Self {
        let index = vocab.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        SequenceCorpus {
            vocab,
            index,
            sequences: Vec::new(),
        }
    }

    pub fn from_token_sequences<I, S, T>(seqs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut corpus = Self::new();
        for s in seqs {
            corpus.push_tokens(s);
        }
        corpus
    }

    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.vocab.len() as u32;
        self.vocab.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    pub fn push_tokens<S: IntoIterator<Item = T>, T: AsRef<str>>(&mut self, seq: S) {
        let ids = seq.into_iter().map(|t| self.intern(t.as_ref())).collect();
        self.sequences.push(ids);
    }

    /// Append a sequence of ids into the existing vocabulary.
    pub(crate) fn push_ids(&mut self, ids: Vec<u32>) {
        debug_assert!(ids.iter().all(|&i| (i as usize) < self.vocab.len()));
        self.sequences.push(ids);
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn token(&self, id: u32) -> &str {
        &self.vocab[id as usize]
    }

    pub fn id_sequences(&self) -> &[Vec<u32>] {
        &self.sequences
    }

    pub fn sequence(&self, i: usize) -> Vec<&str> {
        self.sequences[i].iter().map(|&id| self.token(id)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<&str>> + '_ {
        (0..self.len()).map(|i| self.sequence(i))
    }

    pub fn total_tokens(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }

    /// Keep only tokens satisfying `keep`, preserving order; sequences left
    /// empty are dropped.
    pub fn filter_tokens(&self, keep: impl Fn(&str) -> bool) -> Self {
        let keep_id: Vec<bool> = self.vocab.iter().map(|t| keep(t)).collect();
        let sequences = self
            .sequences
            .iter()
            .map(|s| s.iter().copied().filter(|&id| keep_id[id as usize]).collect::<Vec<_>>())
            .filter(|s| !s.is_empty())
            .collect();
        SequenceCorpus {
            vocab: self.vocab.clone(),
            index: self.index.clone(),
            sequences,
        }
    }

    /// One sequence per line, tokens separated by single spaces.
    pub fn write_lines<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for seq in &self.sequences {
            for (i, &id) in seq.iter().enumerate() {
                if i > 0 {
                    out.write_all(b" ")?;
                }
                out.write_all(self.vocab[id as usize].as_bytes())?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_lines<R: BufRead>(reader: R, origin: &Path) -> Result<Self> {
        let mut corpus = Self::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.is_empty() {
                return Err(Error::parse(origin, i + 1, "empty sequence"));
            }
            corpus.push_tokens(line.split(' '));
        }
        Ok(corpus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walk_file_round_trip() {
        let c = SequenceCorpus::from_token_sequences([vec!["p:P", "a:x", "m:y"], vec!["p:P"]]);
        let mut buf = Vec::new();
        c.write_lines(&mut buf).unwrap();
        assert_eq!(buf, b"p:P a:x m:y\np:P\n");
        let back = SequenceCorpus::read_lines(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back.iter().collect::<Vec<_>>(), c.iter().collect::<Vec<_>>());
    }

    #[test]
    fn filter_drops_empty_sequences() {
        let c = SequenceCorpus::from_token_sequences([vec!["a:1", "m:2"], vec!["a:3"]]);
        let f = c.filter_tokens(|t| t.starts_with("m:"));
        assert_eq!(f.iter().collect::<Vec<_>>(), vec![vec!["m:2"]]);
    }
}
