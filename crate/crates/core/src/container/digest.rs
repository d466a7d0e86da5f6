//! Order-insensitive tree digests.
//!
//! Two trees that differ only in sibling or attribute insertion order are the
//! same tree for comparison purposes; the digest hashes children and
//! attributes in name-sorted order so such trees collapse to one value. Every
//! field is length-prefixed or fixed-width, making the hashed byte stream an
//! injective encoding of the canonicalized tree.

use sha2::{Digest, Sha256};

use super::{AttributeValue, Body, ContainerNode};

/// SHA-256 over the canonical form, as lowercase hex.
pub fn canonical_digest(node: &ContainerNode) -> String {
    let mut hasher = Sha256::new();
    hash_node(node, &mut hasher);
    hex::encode(hasher.finalize())
}

fn hash_str(text: &str, h: &mut Sha256) {
    h.update((text.len() as u64).to_le_bytes());
    h.update(text.as_bytes());
}

fn hash_node(node: &ContainerNode, h: &mut Sha256) {
    match &node.body {
        Body::Group { .. } => h.update([0u8]),
        Body::Dataset { .. } => h.update([1u8]),
    }
    hash_str(node.name(), h);

    let mut attrs: Vec<&(String, AttributeValue)> = node.attrs().iter().collect();
    attrs.sort_by(|a, b| a.0.cmp(&b.0));
    h.update((attrs.len() as u64).to_le_bytes());
    for (name, value) in attrs {
        hash_str(name, h);
        match value {
            AttributeValue::Text(s) => {
                h.update([0u8]);
                hash_str(s, h);
            }
            AttributeValue::Int(v) => {
                h.update([1u8]);
                h.update(v.to_le_bytes());
            }
            AttributeValue::Real(v) => {
                h.update([2u8]);
                h.update(v.to_le_bytes());
            }
        }
    }

    match &node.body {
        Body::Group { children } => {
            let mut by_name: Vec<&ContainerNode> = children.iter().collect();
            by_name.sort_by(|a, b| a.name().cmp(b.name()));
            h.update((by_name.len() as u64).to_le_bytes());
            for child in by_name {
                hash_node(child, h);
            }
        }
        Body::Dataset {
            dtype,
            dims,
            payload,
        } => {
            h.update([dtype.code()]);
            h.update((dims.len() as u64).to_le_bytes());
            for d in dims {
                h.update(d.to_le_bytes());
            }
            h.update((payload.len() as u64).to_le_bytes());
            h.update(payload);
        }
    }
}
