// Copyright 2026 The cvxsplat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>

#include "cvxsplat/trainer.hpp"

namespace cvxsplat::io {

/// Append-only training log: one row per iteration, PSNR columns empty when
/// not evaluated.
class MetricsCsv {
 public:
  explicit MetricsCsv(const std::string& path) : out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot write metrics log " + path);
    out_ << "iteration,loss,l1,dssim,mask,primitive_count,psnr,test_psnr\n";
  }

  void append(const IterationLog& e) {
    out_ << e.iteration << ',' << std::setprecision(10) << e.loss << ',' << e.l1 << ',' << e.dssim << ',' << e.mask
         << ',' << e.primitive_count << ',';
    if (e.psnr) out_ << *e.psnr;
    out_ << ',';
    if (e.test_psnr) out_ << *e.test_psnr;
    out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

}  // namespace cvxsplat::io
