#pragma once

#include <unsupported/Eigen/FFT>

#include "arraycav/types.hpp"

namespace arraycav {

// Unnormalized 2D transforms: forward uses e^{-i}, inverse e^{+i} and divides by the size.
inline CMatX fft2(const CMatX& x, bool inverse = false) {
    Eigen::FFT<double> fft;
    CMatX out(x.rows(), x.cols());
    CVecX tmp_in, tmp_out;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        tmp_in = x.col(c);
        if (inverse)
            fft.inv(tmp_out, tmp_in);
        else
            fft.fwd(tmp_out, tmp_in);
        out.col(c) = tmp_out;
    }
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        tmp_in = out.row(r).transpose();
        if (inverse)
            fft.inv(tmp_out, tmp_in);
        else
            fft.fwd(tmp_out, tmp_in);
        out.row(r) = tmp_out.transpose();
    }
    return out;
}

}  // namespace arraycav
