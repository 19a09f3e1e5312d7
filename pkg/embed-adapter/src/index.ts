export { sampleFramesAtFps } from "./decode.js";
export { createEmbedder, HashEmbedder, ClipEmbedder, type Embedder } from "./embedders.js";
export { AdapterError, DecodeFailure, EmbedderUnavailable, InvalidJob } from "./errors.js";
export { runExtract, type ExtractJob, type ExtractResult } from "./extract.js";
export { writeManifest, type ManifestPayload } from "./manifest.js";
export { parseY4m, type GrayFrame, type Y4mVideo } from "./y4m.js";
