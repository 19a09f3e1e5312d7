export class AdapterError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/** The input video could not be decoded (corrupt, unsupported, no decoder). */
export class DecodeFailure extends AdapterError {}

/** The requested embedding backend cannot be loaded in this environment. */
export class EmbedderUnavailable extends AdapterError {}

/** The extraction job parameters are invalid. */
export class InvalidJob extends AdapterError {}
