#pragma once

namespace ktpent::bundled {

// Contents of data/ktp_ny_koenig_wong.json, data/ktp_nz_fradkin.json and
// data/ppktp_default.json.
extern const char* const kKtpNyJson;
extern const char* const kKtpNzJson;
extern const char* const kDefaultCrystalJson;

}  // namespace ktpent::bundled
