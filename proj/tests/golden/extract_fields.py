#!/usr/bin/env python3
"""Extracts comparison fields from OpenSSL's text dump of a fixture.

OpenSSL acts as the independent ASN.1 oracle: every value in the emitted
.fields file is taken from `openssl x509/crl -text` output and only
re-formatted into the toolkit's canonical forms (leaf-first DNs, ISO-8601
timestamps, decimal serials). A sha256 line pins the exact fixture bytes the
dump was made from.
"""

import hashlib
import re
import subprocess
import sys
from datetime import datetime, timezone

KEY_USAGE_NAMES = {
    "Digital Signature": "digitalSignature",
    "Non Repudiation": "nonRepudiation",
    "Key Encipherment": "keyEncipherment",
    "Data Encipherment": "dataEncipherment",
    "Key Agreement": "keyAgreement",
    "Certificate Sign": "keyCertSign",
    "CRL Sign": "cRLSign",
    "Encipher Only": "encipherOnly",
    "Decipher Only": "decipherOnly",
}


def to_iso(text):
    dt = datetime.strptime(text.strip(), "%b %d %H:%M:%S %Y %Z")
    return dt.replace(tzinfo=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def dn_leaf_first(openssl_dn):
    # "C = DE, O = OrgCA, CN = MyCA" -> "CN=MyCA,O=OrgCA,C=DE"
    parts = [p.strip() for p in openssl_dn.split(",")]
    pairs = []
    for part in parts:
        attr, _, value = part.partition("=")
        pairs.append(f"{attr.strip()}={value.strip()}")
    return ",".join(reversed(pairs))


def run_openssl(kind, path):
    cmd = ["openssl", kind, "-inform", "DER", "-in", path, "-noout", "-text"]
    return subprocess.run(cmd, check=True, capture_output=True, text=True).stdout


def extract_certificate(path):
    text = run_openssl("x509", path)
    fields = {"type": "certificate"}
    m = re.search(r"Serial Number:\s*(\d+)\s*\(0x[0-9a-fA-F]+\)", text)
    if m:
        fields["serial"] = m.group(1)
    else:
        m = re.search(r"Serial Number:\s*\n\s*([0-9a-fA-F:]+)", text)
        fields["serial"] = str(int(m.group(1).replace(":", ""), 16))
    fields["issuer"] = dn_leaf_first(re.search(r"Issuer: (.+)", text).group(1))
    fields["subject"] = dn_leaf_first(re.search(r"Subject: (.+)", text).group(1))
    fields["not_before"] = to_iso(re.search(r"Not Before: (.+)", text).group(1))
    fields["not_after"] = to_iso(re.search(r"Not After : (.+)", text).group(1))
    m = re.search(r"X509v3 Key Usage:.*\n\s*(.+)", text)
    if m:
        usages = [KEY_USAGE_NAMES[u.strip()] for u in m.group(1).split(",")]
        fields["key_usage"] = ",".join(usages)
    fields["is_ca"] = "true" if "CA:TRUE" in text else "false"
    m = re.search(r"URI:(\S+)", text)
    if m:
        fields["crl_dp_url"] = m.group(1)
    return fields, text


def extract_crl(path):
    text = run_openssl("crl", path)
    fields = {"type": "crl"}
    fields["issuer"] = dn_leaf_first(re.search(r"Issuer: (.+)", text).group(1))
    fields["this_update"] = to_iso(re.search(r"Last Update: (.+)", text).group(1))
    m = re.search(r"Next Update: (.+)", text)
    if m and "NONE" not in m.group(1):
        fields["next_update"] = to_iso(m.group(1))
    m = re.search(r"X509v3 CRL Number:\s*\n\s*(\d+)", text)
    if m:
        fields["crl_number"] = m.group(1)
    m = re.search(r"X509v3 Delta CRL Indicator:.*\n\s*(\d+)", text)
    if m:
        fields["base_crl_number"] = m.group(1)
    fields["indirect"] = "true" if "Indirect CRL" in text else "false"
    revoked = []
    for m in re.finditer(
        r"Serial Number: ([0-9A-Fa-f]+)\s*\n\s*Revocation Date: (.+)", text
    ):
        revoked.append(f"{int(m.group(1), 16)}@{to_iso(m.group(2))}")
    fields["revoked"] = ";".join(revoked)
    return fields, text


def main():
    if len(sys.argv) != 4:
        print("usage: extract_fields.py <cert|crl> <fixture.der> <output-prefix>")
        return 2
    kind, path, prefix = sys.argv[1:]
    fields, dump = (
        extract_certificate(path) if kind == "cert" else extract_crl(path)
    )
    with open(path, "rb") as f:
        data = f.read()
    fields["sha256"] = hashlib.sha256(data).hexdigest()
    fields["sha1"] = hashlib.sha1(data).hexdigest()
    with open(prefix + ".fields", "w") as f:
        for key, value in fields.items():
            f.write(f"{key}={value}\n")
    with open(prefix + ".asn1.txt", "w") as f:
        f.write(dump)
    return 0


if __name__ == "__main__":
    sys.exit(main())
