# Copyright 2026 The TinyInfer Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Validates tinyinfer_bench JSON reports against docs/bench_report.schema.json.

Usage: validate_report.py [--schema PATH] REPORT.json [...]

Besides the schema, checks that the group breakdown adds up to the total
within 1% and that top-5 probabilities are in descending order.
"""

import argparse
import json
import pathlib
import sys

import jsonschema

DEFAULT_SCHEMA = pathlib.Path(__file__).resolve().parent.parent / "docs" / "bench_report.schema.json"


def check_mode(mode, where):
  errors = []
  g = mode["groups"]
  parts = g["group1_ms"] + g["group2_ms"] + g["quant_overhead_ms"] + g["other_ms"]
  if g["total_ms"] > 0 and abs(parts - g["total_ms"]) > 0.01 * g["total_ms"]:
    errors.append(f"{where}: groups sum to {parts:.3f} ms, total is {g['total_ms']:.3f} ms")
  probs = [t["prob"] for t in mode["top5"]]
  if probs != sorted(probs, reverse=True):
    errors.append(f"{where}: top5 not in descending order")
  if mode["timing"]["iterations"] != len(mode["timing"]["samples_ms"]):
    errors.append(f"{where}: sample count differs from iterations")
  return errors


def validate(report, schema):
  jsonschema.validate(report, schema)
  errors = check_mode(report["result"], "result")
  if "comparison" in report:
    errors += check_mode(report["comparison"]["float"], "comparison.float")
  return errors


def main(argv):
  parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
  parser.add_argument("--schema", type=pathlib.Path, default=DEFAULT_SCHEMA)
  parser.add_argument("reports", nargs="+", type=pathlib.Path)
  args = parser.parse_args(argv)
  schema = json.loads(args.schema.read_text())
  jsonschema.Draft202012Validator.check_schema(schema)
  status = 0
  for path in args.reports:
    try:
      errors = validate(json.loads(path.read_text()), schema)
    except (json.JSONDecodeError, jsonschema.ValidationError) as e:
      errors = [str(e).splitlines()[0]]
    for e in errors:
      print(f"{path}: {e}", file=sys.stderr)
    if errors:
      status = 1
    else:
      print(f"{path}: ok")
  return status


if __name__ == "__main__":
  sys.exit(main(sys.argv[1:]))
