// Regenerates the synthetic fixtures under data/fixtures.
#include <fstream>
#include <iostream>
#include <string>

#include "segtag/corpus.hpp"
#include "synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures DIR\n";
    return 2;
  }
  const std::string dir = argv[1];
  auto write = [&](const std::string& name, const segtag::TagDoc& doc) {
    std::ofstream out(dir + "/" + name);
    segtag::WriteConllu(out, doc);
  };
  write("train50.conllu", segtag::testing::SyntheticCorpus(50, 2024));
  write("dev20.conllu", segtag::testing::SyntheticCorpus(20, 4048));
  return 0;
}
