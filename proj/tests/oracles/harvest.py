#!/usr/bin/env python3
"""Regenerates the frozen oracle values used by tests/unit/oracle_values.hpp.

Uses dnspython + cryptography as an implementation independent of the C++ code.
Run: python3 tests/oracles/harvest.py
"""
import base64
import hashlib

import dns.dnssec
import dns.flags
import dns.message
import dns.name
import dns.rdata
import dns.rrset
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric import ec, ed25519, rsa


def hexs(b):
    return b.hex()


# Worked examples from the DNSSEC base RFCs (4034 5.4, 4509 2.3, 8080 6.1).
rfc_key = dns.rdata.from_text(
    "IN", "DNSKEY",
    "256 3 5 AQOeiiR0GOMYkDshWoSKz9XzfwJr1AYtsmx3TGkJaNXVbfi/2pHm822aJ5iI9BMzNXxeYCmZ"
    "DRD99WYwYqUSdjMmmAphXdvxegXd/M5+X7OrzKBaMbCVdFLUUh6DhweJBjEVv5f2wwjM9XzcnOf+EPbtG9DMBmADjFDc2w/rljwvFw==")
print("rfc4034 key tag", dns.dnssec.key_id(rfc_key))
owner = dns.name.from_text("dskey.example.com.")
print("rfc4509 ds sha256", hashlib.sha256(owner.to_wire() + rfc_key.to_wire()).hexdigest())
ed_key = dns.rdata.from_text("IN", "DNSKEY", "257 3 15 l02Woi0iS8Aa25FQkUd9RMzZHJpBoRQwAQEX1SxZJA4=")
print("rfc8080 key tag", dns.dnssec.key_id(ed_key))
print("rfc8080 ds", dns.dnssec.make_ds("example.com.", ed_key, "SHA256"))
ed_priv = ed25519.Ed25519PrivateKey.from_private_bytes(
    base64.b64decode("ODIyNjAzODQ2MjgwODAxMjI2NDUxOTAyMDQxNDIyNjI="))
mx = dns.rrset.from_text("example.com.", 3600, "IN", "MX", "10 mail.example.com.")
sig = dns.dnssec.sign(mx, ed_priv, dns.name.from_text("example.com."), ed_key,
                      inception=1438207200, expiration=1440021600)
print("rfc8080 mx rrsig", base64.b64encode(sig.signature).decode())

# Wire encodings.
q = dns.message.make_query("example.test.", "A", want_dnssec=True, payload=1232)
q.id = 0x1234
print("query example.test A DO", hexs(q.to_wire()))
r = dns.message.make_response(dns.message.make_query("host.example.test.", "A"))
r.id = 0xbeef
r.flags |= dns.flags.AA
r.answer.append(dns.rrset.from_text("host.example.test.", 300, "IN", "A", "192.0.2.7"))
print("response host A", hexs(r.to_wire()))

# Cross-signer fixture: one A RRset signed with fixed keys for algorithms 8, 13, 15.
rsa_priv = rsa.generate_private_key(public_exponent=65537, key_size=1024)
ec_priv = ec.generate_private_key(ec.SECP256R1())
ed2_priv = ed25519.Ed25519PrivateKey.from_private_bytes(bytes(range(32)))
zone = dns.name.from_text("example.test.")
rrset = dns.rrset.from_text("WWW.Example.test.", 300, "IN", "A", "10.0.0.2", "10.0.0.1")
inception, expiration = 1700000000, 1700604800
for alg, priv in ((8, rsa_priv), (13, ec_priv), (15, ed2_priv)):
    key = dns.dnssec.make_dnskey(priv.public_key(), alg, flags=257)
    s = dns.dnssec.sign(rrset, priv, zone, key, inception=inception, expiration=expiration)
    if alg == 8:
        material = priv.private_bytes(serialization.Encoding.DER,
                                      serialization.PrivateFormat.TraditionalOpenSSL,
                                      serialization.NoEncryption())
    elif alg == 13:
        material = priv.private_numbers().private_value.to_bytes(32, "big")
    else:
        material = priv.private_bytes(serialization.Encoding.Raw, serialization.PrivateFormat.Raw,
                                      serialization.NoEncryption())
    print(f"alg {alg} dnskey", base64.b64encode(key.key).decode())
    print(f"alg {alg} key tag", dns.dnssec.key_id(key))
    print(f"alg {alg} private", base64.b64encode(material).decode())
    print(f"alg {alg} rrsig", base64.b64encode(s.signature).decode())
